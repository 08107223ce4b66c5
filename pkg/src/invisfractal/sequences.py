"""Cut-abscissa and focus-offset ladders for the 2D mirror constructions.

A body of depth N is controlled by two finite sequences: ``cuts``
(c_0 > c_1 > ... > c_N > 0, the abscissas where consecutive mirror levels
meet) and ``offsets`` (a_1 > a_2 > ... > a_N >= 0, the abscissas of the level
foci measured along the carrying side).  Given c_0, c_1 and the offsets, each
next cut is forced:

    c_{i+1} = (c_i + a_i)**2 / (c_{i-1} + a_i) - a_i

and each offset must satisfy (with a_0 = +inf)

    0 < a_i < a_{i-1}   and   a_i * (c_{i-1} - 2 c_i) < c_i**2,

which together keep the cuts positive and strictly decreasing.  The all-zero
offset ladder is the admissible boundary case: the mirror pairs collapse to
zero thickness and the cuts form a geometric sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ConstraintViolation, InvalidSeed


@dataclass(frozen=True)
class ThinLimit:
    """All offsets zero: thin mirrors, geometric cut ladder."""


@dataclass(frozen=True)
class ConstantFraction:
    """Each offset at a fixed fraction of the largest admissible value."""

    gamma: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise InvalidSeed(f"gamma must lie in (0, 1), got {self.gamma}")


@dataclass(frozen=True)
class ExplicitOffsets:
    """Caller-supplied offsets, validated against the admissibility bounds."""

    values: tuple

    def __init__(self, values: Sequence[float]):
        object.__setattr__(self, "values", tuple(float(v) for v in values))


Policy = Union[ThinLimit, ConstantFraction, ExplicitOffsets]


@dataclass(frozen=True)
class SequencePair:
    cuts: np.ndarray  # c_0 .. c_N, strictly decreasing, positive
    offsets: np.ndarray  # a_1 .. a_N, non-increasing, non-negative
    policy: Policy

    @property
    def depth(self) -> int:
        return len(self.offsets)

    @property
    def thin(self) -> bool:
        return bool(np.all(self.offsets == 0.0))

    def offset(self, i: int) -> float:
        """a_i for i = 1..N (a_0 is +inf by convention)."""
        if i == 0:
            return float("inf")
        return float(self.offsets[i - 1])

    def ratio(self, i: int) -> float:
        """Homothety ratio (c_i + a_i) / (c_{i-1} + a_i) for i = 1..N-1."""
        a = self.offset(i)
        return (float(self.cuts[i]) + a) / (float(self.cuts[i - 1]) + a)


def _next_cut(c_prev: float, c_cur: float, a: float) -> float:
    return (c_cur + a) ** 2 / (c_prev + a) - a


def _offset_bound(c_prev: float, c_cur: float) -> float:
    gap = c_prev - 2.0 * c_cur
    if gap > 0.0:
        return c_cur * c_cur / gap
    return float("inf")


def generate_sequences(c: float, c1: float, policy: Policy, n: int) -> SequencePair:
    """Build a depth-``n`` ladder from the seed pair (c_0, c_1) and a policy."""
    if n < 1:
        raise InvalidSeed(f"depth must be >= 1, got {n}")
    if not (0.0 < c1 < c):
        raise InvalidSeed(f"need 0 < c1 < c, got c1={c1}, c={c}")

    cuts = [float(c), float(c1)]
    offsets: list[float] = []
    explicit = policy.values if isinstance(policy, ExplicitOffsets) else None
    if explicit is not None and len(explicit) < n:
        raise InvalidSeed(
            f"explicit offsets list has {len(explicit)} entries, depth {n} needs {n}"
        )

    a_prev = float("inf")
    for i in range(1, n + 1):
        c_prev, c_cur = cuts[i - 1], cuts[i]
        bound = _offset_bound(c_prev, c_cur)
        if isinstance(policy, ThinLimit):
            a = 0.0
        elif isinstance(policy, ConstantFraction):
            # Cap by c_0 as well: the admissibility bound is +inf whenever
            # c_{i-1} <= 2 c_i, and gamma * inf is meaningless.
            a = policy.gamma * min(a_prev, bound, cuts[0])
        else:
            a = float(explicit[i - 1])
            if not (0.0 < a < a_prev):
                raise ConstraintViolation(
                    f"offset a_{i}={a} must satisfy 0 < a_{i} < a_{i-1}={a_prev}"
                )
            if a * (c_prev - 2.0 * c_cur) >= c_cur * c_cur:
                raise ConstraintViolation(
                    f"offset a_{i}={a} violates a_{i}*(c_{i-1} - 2*c_{i}) < c_{i}**2 "
                    f"({a * (c_prev - 2.0 * c_cur)} >= {c_cur * c_cur})"
                )
        offsets.append(a)
        a_prev = a if a > 0.0 else a_prev
        if i < n:
            cuts.append(_next_cut(c_prev, c_cur, a))

    pair = SequencePair(np.array(cuts), np.array(offsets), policy)
    audit_sequences(pair)
    return pair


def audit_sequences(seq: SequencePair) -> None:
    """Re-check every admissibility inequality and the cut recurrence.

    Raises :class:`ConstraintViolation` on the first failure.  The all-zero
    (thin) ladder is accepted with the strict offset inequalities relaxed.
    """
    cuts, offs = seq.cuts, seq.offsets
    n = len(offs)
    if len(cuts) != n + 1:
        raise ConstraintViolation("cuts must have one more entry than offsets")
    if not np.all(cuts > 0.0):
        raise ConstraintViolation("all cuts must be positive")
    if not np.all(np.diff(cuts) < 0.0):
        raise ConstraintViolation("cuts must be strictly decreasing")

    a_prev = float("inf")
    for i in range(1, n + 1):
        a = float(offs[i - 1])
        if a < 0.0:
            raise ConstraintViolation(f"offset a_{i}={a} is negative")
        if a == 0.0:
            pass  # thin-limit boundary case; the size bound is vacuous
        elif not a < a_prev:
            raise ConstraintViolation(f"offsets must decrease: a_{i}={a} >= {a_prev}")
        elif a * (cuts[i - 1] - 2.0 * cuts[i]) >= cuts[i] ** 2:
            raise ConstraintViolation(f"offset a_{i}={a} violates the size bound")
        if i < n:
            expected = _next_cut(float(cuts[i - 1]), float(cuts[i]), a)
            if expected != float(cuts[i + 1]):
                raise ConstraintViolation(
                    f"cut recurrence broken at c_{i + 1}: "
                    f"{cuts[i + 1]!r} != {expected!r}"
                )
        if a > 0.0:
            a_prev = a
