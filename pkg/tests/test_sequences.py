import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invisfractal.errors import ConstraintViolation, InvalidSeed
from invisfractal.sequences import (
    ConstantFraction,
    ExplicitOffsets,
    SequencePair,
    ThinLimit,
    audit_sequences,
    generate_sequences,
)


def test_thin_dyadic_ladder_exact():
    seq = generate_sequences(1.0, 0.5, ThinLimit(), 8)
    assert np.array_equal(seq.cuts, np.ldexp(1.0, -np.arange(9)))
    assert np.all(seq.offsets == 0.0)
    assert seq.thin


def test_explicit_first_step_value():
    seq = generate_sequences(1.0, 0.5, ExplicitOffsets([0.2 / 10 ** k for k in range(4)]), 4)
    # c_2 = (c_1 + a_1)**2 / (c_0 + a_1) - a_1 with c_1 = 0.5, a_1 = 0.2
    assert seq.cuts[2] == pytest.approx(0.7 ** 2 / 1.2 - 0.2, abs=0)
    assert seq.cuts[2] == pytest.approx(0.20833333333333334, abs=1e-16)
    # the admissibility product is zero here: a_1 * (c_0 - 2 c_1) = 0 < c_1**2
    assert 0.2 * (1.0 - 2 * 0.5) < 0.5 ** 2


def test_explicit_boundary_offset_accepted():
    # c_0 - 2 c_1 = 0 makes the size bound vacuous; a_1 larger than c_1 is fine.
    seq = generate_sequences(1.0, 0.5, ExplicitOffsets([0.6, 0.01]), 2)
    assert seq.offsets[0] == 0.6


def test_explicit_violation_raises():
    # a_1 = 0.3 with c_1 = 0.2: a_1 * (1 - 0.4) = 0.18 >= 0.04
    with pytest.raises(ConstraintViolation):
        generate_sequences(1.0, 0.2, ExplicitOffsets([0.3, 0.1]), 2)


def test_explicit_must_decrease():
    with pytest.raises(ConstraintViolation):
        generate_sequences(1.0, 0.5, ExplicitOffsets([0.01, 0.02]), 2)


def test_invalid_seeds():
    with pytest.raises(InvalidSeed):
        generate_sequences(1.0, 1.5, ThinLimit(), 3)
    with pytest.raises(InvalidSeed):
        generate_sequences(1.0, 0.5, ThinLimit(), 0)
    with pytest.raises(InvalidSeed):
        generate_sequences(1.0, 0.5, ExplicitOffsets([0.1]), 2)
    with pytest.raises(InvalidSeed):
        ConstantFraction(1.0)


def test_constant_fraction_monotone_positive_deep():
    for c1 in (0.5, 0.6, 0.7):
        seq = generate_sequences(1.0, c1, ConstantFraction(0.5), 32)
        assert np.all(seq.cuts > 0)
        assert np.all(np.diff(seq.cuts) < 0)
        audit_sequences(seq)


def test_depth32_underflow_is_an_error_not_a_zero_cut():
    # Aggressive offsets shrink the cuts quadratically in the exponent; when
    # float64 underflows the generator must refuse rather than emit zeros.
    with pytest.raises(ConstraintViolation):
        generate_sequences(1.0, 0.2, ConstantFraction(0.5), 32)


def test_audit_detects_broken_recurrence():
    seq = generate_sequences(1.0, 0.4, ConstantFraction(0.5), 4)
    cuts = seq.cuts.copy()
    cuts[2] *= 1.0 + 1e-12
    with pytest.raises(ConstraintViolation):
        audit_sequences(SequencePair(cuts, seq.offsets, seq.policy))


def test_audit_detects_negative_offset():
    seq = generate_sequences(1.0, 0.4, ConstantFraction(0.5), 4)
    offs = seq.offsets.copy()
    offs[1] = -offs[1]
    with pytest.raises(ConstraintViolation):
        audit_sequences(SequencePair(seq.cuts, offs, seq.policy))


def test_ratio_matches_definition():
    seq = generate_sequences(1.0, 0.4, ConstantFraction(0.5), 6)
    for i in range(1, 6):
        a = seq.offsets[i - 1]
        assert seq.ratio(i) == pytest.approx((seq.cuts[i] + a) / (seq.cuts[i - 1] + a), abs=0)


@given(
    c1_frac=st.floats(0.05, 0.95),
    gamma=st.floats(0.05, 0.95),
    n=st.integers(1, 12),
    scale=st.floats(1e-3, 1e3),
)
@settings(max_examples=150, deadline=None)
def test_generated_ladders_always_audit(c1_frac, gamma, n, scale):
    seq = generate_sequences(scale, c1_frac * scale, ConstantFraction(gamma), n)
    audit_sequences(seq)
    assert seq.cuts[0] == scale
