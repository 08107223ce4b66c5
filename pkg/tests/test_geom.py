import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invisfractal.errors import DegenerateParabola
from invisfractal.geom import (
    CylinderPatch3,
    Homothety2,
    Parabola2,
    ParabolicArc2,
    Ray,
    Segment2,
    apply_homothety,
    intersect_ray_arc,
    intersect_ray_patch,
    intersect_ray_segment,
    parabola_from_focus_and_point,
    reflect,
)


def unit2(theta):
    return np.array([math.cos(theta), math.sin(theta)])


def test_reflect_head_on_reversal():
    out = reflect(np.array([0.0, -1.0]), np.array([0.0, 1.0]))
    assert np.allclose(out, [0.0, 1.0], atol=0)


def test_reflect_horizontal_mirror_flips_vertical():
    v = np.array([1.0, -1.0]) / math.sqrt(2)
    out = reflect(v, np.array([0.0, 1.0]))
    assert np.allclose(out, np.array([1.0, 1.0]) / math.sqrt(2), atol=1e-15)


def test_reflect_involution_and_energy_bulk(rng):
    n = 100_000
    v = rng.normal(size=(n, 2))
    v /= np.linalg.norm(v, axis=1)[:, None]
    m = rng.normal(size=(n, 2))
    m /= np.linalg.norm(m, axis=1)[:, None]
    once = v - 2 * np.sum(v * m, axis=1)[:, None] * m
    twice = once - 2 * np.sum(once * m, axis=1)[:, None] * m
    assert np.abs(twice - v).max() <= 1e-12
    assert np.abs(np.linalg.norm(once, axis=1) - 1).max() <= 1e-12


@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
@settings(max_examples=200, deadline=None)
def test_reflect_involution_hypothesis(a, b):
    v, m = unit2(a), unit2(b)
    assert np.allclose(reflect(reflect(v, m), m), v, atol=1e-12)


def std_arc(xlo=0.5, xhi=1.0):
    # y = x**2/2 + 1/2, focus (0, 1), f = 1/2
    return ParabolicArc2(Parabola2(np.array([0.0, 1.0]), np.array([0.0, 1.0]), 0.5), xlo, xhi)


def test_reflected_ray_passes_through_focus():
    arc = std_arc()
    ray = Ray(np.array([0.75, 2.0]), np.array([0.0, -1.0]))
    hit = intersect_ray_arc(ray, arc, 1e-9)
    assert hit is not None
    out = reflect(ray.direction, hit.normal)
    # Line from the hit point along `out` must contain the focus (0, 1).
    to_focus = np.array([0.0, 1.0]) - hit.point
    cross = out[0] * to_focus[1] - out[1] * to_focus[0]
    assert abs(cross) <= 1e-10


def test_parabola_from_focus_and_point_unit_case():
    pa = parabola_from_focus_and_point((0.0, 1.0), (-1.0, 1.0), (0.0, 1.0))
    assert pa.f == pytest.approx(0.5, abs=1e-15)
    # graph form y = x**2/2 + 1/2
    for x in (-1.0, -0.3, 0.7):
        xi, eta = pa.to_local(np.array([x, x * x / 2 + 0.5]))
        assert abs(eta - pa.height(xi)) <= 1e-12


def test_parabola_from_focus_and_point_quarter_case():
    pa = parabola_from_focus_and_point((0.0, 1.0), (-0.5, 1.0), (0.0, 1.0))
    assert pa.f == pytest.approx(0.25, abs=1e-15)
    xi, eta = pa.to_local(np.array([0.3, 0.3 ** 2 + 0.75]))
    assert abs(eta - pa.height(xi)) <= 1e-12


def test_parabola_degenerate_point_on_opening_ray():
    with pytest.raises(DegenerateParabola):
        parabola_from_focus_and_point((0.0, 0.0), (0.0, 1.0), (0.0, 1.0))


def test_intersect_examples():
    arc = std_arc()
    hit = intersect_ray_arc(Ray(np.array([0.75, 2.0]), np.array([0.0, -1.0])), arc, 1e-9)
    assert hit is not None
    assert np.allclose(hit.point, [0.75, 0.78125], atol=1e-12)
    assert not hit.at_boundary
    assert intersect_ray_arc(Ray(np.array([0.3, 2.0]), np.array([0.0, -1.0])), arc, 1e-9) is None
    near = intersect_ray_arc(
        Ray(np.array([0.5 + 1e-14, 2.0]), np.array([0.0, -1.0])), arc, 1e-9, rim_eps=2e-9
    )
    assert near is not None and near.at_boundary


def test_hit_point_on_ray_and_normal_orientation(rng):
    for _ in range(200):
        f = rng.uniform(0.05, 1.0)
        th = rng.uniform(0, 2 * math.pi)
        focus = rng.uniform(-1, 1, 2)
        arc = ParabolicArc2(Parabola2(focus, unit2(th), f), -1.0, 1.0)
        origin = focus + 3.0 * unit2(rng.uniform(0, 2 * math.pi))
        target = arc.parabola.point_at(rng.uniform(-1, 1))
        ray = Ray(origin, target - origin)
        hit = intersect_ray_arc(ray, arc, 1e-9)
        if hit is None:
            continue
        assert np.linalg.norm(ray.at(hit.t) - hit.point) <= 1e-10
        assert np.dot(hit.normal, ray.direction) < 0
        assert abs(arc.parabola.implicit(hit.point)) <= 1e-10


def test_intersection_consistency_bulk(rng):
    """Hit satisfies the implicit equation and is the smallest valid root of
    an independently assembled world-space quadratic."""
    n = 10_000
    worst_resid = 0.0
    checked = 0
    for _ in range(n):
        f = rng.uniform(0.05, 0.8)
        th = rng.uniform(0, 2 * math.pi)
        focus = rng.uniform(-0.5, 0.5, 2)
        arc = ParabolicArc2(Parabola2(focus, unit2(th), f), -1.2, 1.2)
        origin = focus + 4.0 * unit2(rng.uniform(0, 2 * math.pi))
        ray = Ray(origin, arc.parabola.point_at(rng.uniform(-1.2, 1.2)) - origin)
        hit = intersect_ray_arc(ray, arc, 1e-9)
        if hit is None:
            continue
        checked += 1
        worst_resid = max(worst_resid, abs(arc.parabola.implicit(hit.point)))
        # Independent derivation: |P - F|**2 = (dist to directrix)**2 along ray.
        pa = arc.parabola
        u = pa.axis
        base = origin - pa.focus
        a2 = 1.0 - np.dot(ray.direction, u) ** 2
        b2 = 2 * (np.dot(base, ray.direction)
                  - (np.dot(base, u) + 2 * f) * np.dot(ray.direction, u))
        c2 = np.dot(base, base) - (np.dot(base, u) + 2 * f) ** 2
        roots = np.roots([a2, b2, c2]) if abs(a2) > 1e-14 else np.array([-c2 / b2])
        valid = []
        for t in np.real(roots[np.abs(np.imag(roots)) < 1e-9]):
            if t <= 1e-9:
                continue
            xi, eta = pa.to_local(ray.at(float(t)))
            if arc.xi_lo <= xi <= arc.xi_hi and eta + 2 * f > 0:
                valid.append(float(t))
        assert valid, "independent quadratic found no admissible root"
        assert hit.t == pytest.approx(min(valid), abs=1e-8)
    assert checked > n // 3
    assert worst_resid <= 1e-10


def test_segment_intersection_and_rim():
    seg = Segment2(np.array([-1.0, 0.0]), np.array([1.0, 0.0]))
    hit = intersect_ray_segment(Ray(np.array([0.25, 1.0]), np.array([0.0, -1.0])), seg, 1e-9)
    assert hit is not None and np.allclose(hit.point, [0.25, 0.0])
    assert np.allclose(hit.normal, [0.0, 1.0])
    missed = intersect_ray_segment(Ray(np.array([2.0, 1.0]), np.array([0.0, -1.0])), seg, 1e-9)
    assert missed is None
    rim = intersect_ray_segment(
        Ray(np.array([1.0 - 1e-12, 1.0]), np.array([0.0, -1.0])), seg, 1e-9, rim_eps=2e-9
    )
    assert rim is not None and rim.at_boundary


def test_homothety_examples():
    assert np.allclose(apply_homothety(Homothety2(np.zeros(2), 1.0), (0.3, -2.0)), [0.3, -2.0])
    h = Homothety2(np.array([0.0, 1.0]), 0.5)
    assert np.allclose(h.apply(np.array([-1.0, 1.0])), [-0.5, 1.0])
    r = 0.37
    h2 = Homothety2(np.array([0.2, -0.1]), r)
    p = np.array([1.3, 2.2])
    twice = h2.apply(h2.apply(p))
    direct = Homothety2(np.array([0.2, -0.1]), r * r).apply(p)
    assert np.allclose(twice, direct, atol=1e-14)


def test_confocal_homothety_maps_parabolas(rng):
    for _ in range(50):
        focus = rng.uniform(-1, 1, 2)
        th = rng.uniform(0, 2 * math.pi)
        f1, f2 = rng.uniform(0.1, 1.0, 2)
        p1 = Parabola2(focus, unit2(th), f1)
        p2 = Parabola2(focus, unit2(th), f2)
        h = Homothety2(focus, f2 / f1)
        for xi in np.linspace(-1, 1, 16):
            img = h.apply(p1.point_at(xi))
            xi2, eta2 = p2.to_local(img)
            assert abs(eta2 - p2.height(xi2)) <= 1e-12


def z_opening_patch():
    # z = y**2/2 + 1/2 extruded along x, trimmed to 0.5 <= x <= z.
    return CylinderPatch3(1, 2, 0, 1.0, 1.0, 1.0, 0.5, 0.0, 0.5, 0.5, 1.0, 0.5)


def test_patch_intersection_example():
    patch = z_opening_patch()
    hit = intersect_ray_patch(
        Ray(np.array([0.6, 0.8, 2.0]), np.array([0.0, 0.0, -1.0])), patch, 1e-9
    )
    assert hit is not None
    assert np.allclose(hit.point, [0.6, 0.8, 0.82], atol=1e-12)
    assert 0.5 <= 0.6 <= 0.82


def test_patch_trim_rejects():
    patch = z_opening_patch()
    assert intersect_ray_patch(
        Ray(np.array([0.3, 0.8, 2.0]), np.array([0.0, 0.0, -1.0])), patch, 1e-9
    ) is None


def test_patch_axis_parallel_outside_misses():
    patch = z_opening_patch()
    assert intersect_ray_patch(
        Ray(np.array([-5.0, 0.8, 5.0]), np.array([1.0, 0.0, 0.0])), patch, 1e-9
    ) is None


def test_grazing_discriminant_is_miss():
    arc = std_arc(-1.0, 1.0)
    # Horizontal ray exactly tangent to the vertex height y = 0.5.
    ray = Ray(np.array([-3.0, 0.5]), np.array([1.0, 0.0]))
    assert intersect_ray_arc(ray, arc, 1e-9, graze_eps=1e-13) is None
