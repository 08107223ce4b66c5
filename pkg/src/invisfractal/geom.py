"""Exact 2D/3D geometric primitives: parabolas, rays, reflection, homothety.

Every parabola is stored as focus + opening axis + focal length.  In the
parabola's local frame (xi along ``perp(axis)``, eta along ``axis``, origin at
the focus) the curve is ``eta = xi**2 / (4 f) - f``; the vertex sits at
``eta = -f`` and the directrix at ``eta = -2 f``.  Arcs carry a closed xi
interval.  Scalar routines here are the reference implementations; the batch
kernels in ``_kernels_numpy``/``_kernels_numba`` mirror them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DegenerateParabola
from .tolerances import (
    GRAZE_DISC_REL,
    MIN_ADVANCE_REL,
    RIM_PROXIMITY_REL,
    UNIT_NORM_TOL,
)

Point = np.ndarray  # shape (2,) or (3,), float64


def vec(*components: float) -> np.ndarray:
    return np.array(components, dtype=np.float64)


def unit(v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(v))
    if n == 0.0 or not math.isfinite(n):
        raise ValueError("cannot normalize zero or non-finite vector")
    return v / n


def is_unit(v: np.ndarray, tol: float = UNIT_NORM_TOL) -> bool:
    return abs(float(np.linalg.norm(v)) - 1.0) <= tol


def perp(u: np.ndarray) -> np.ndarray:
    """Clockwise perpendicular; (0,1) -> (1,0) so xi grows with world x."""
    return np.array([u[1], -u[0]], dtype=np.float64)


def rot90(u: np.ndarray) -> np.ndarray:
    """Counter-clockwise perpendicular; inverse companion of :func:`perp`."""
    return np.array([-u[1], u[0]], dtype=np.float64)


@dataclass(frozen=True)
class Ray:
    """Half-line ``origin + t * direction`` with a unit direction."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))
        object.__setattr__(self, "direction", unit(self.direction))

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction

    @property
    def dim(self) -> int:
        return self.origin.shape[0]


def reflect(v: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Specular reflection ``v' = v - 2 (v.n) n`` of a unit vector."""
    v = np.asarray(v, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return v - 2.0 * float(np.dot(v, n)) * n


@dataclass(frozen=True)
class Parabola2:
    """Parabola from focus, opening axis (unit, vertex -> focus) and f > 0."""

    focus: np.ndarray
    axis: np.ndarray
    f: float

    def __post_init__(self):
        object.__setattr__(self, "focus", np.asarray(self.focus, dtype=np.float64))
        object.__setattr__(self, "axis", unit(self.axis))
        if not self.f > 0.0:
            raise DegenerateParabola(f"focal length must be positive, got {self.f}")

    @property
    def xhat(self) -> np.ndarray:
        return perp(self.axis)

    @property
    def vertex(self) -> np.ndarray:
        return self.focus - self.f * self.axis

    def to_local(self, p: np.ndarray) -> tuple[float, float]:
        rel = np.asarray(p, dtype=np.float64) - self.focus
        return float(np.dot(rel, self.xhat)), float(np.dot(rel, self.axis))

    def from_local(self, xi: float, eta: float) -> np.ndarray:
        return self.focus + xi * self.xhat + eta * self.axis

    def height(self, xi: float) -> float:
        """eta of the curve at transverse coordinate xi."""
        return xi * xi / (4.0 * self.f) - self.f

    def point_at(self, xi: float) -> np.ndarray:
        return self.from_local(xi, self.height(xi))

    def normal_at(self, xi: float) -> np.ndarray:
        """Unit normal on the concave (focus) side."""
        g = -(xi / (2.0 * self.f)) * self.xhat + self.axis
        return g / float(np.linalg.norm(g))

    def implicit(self, p: np.ndarray) -> float:
        """``xi**2 - 4 f (eta + f)``; zero on the curve, negative focus side."""
        xi, eta = self.to_local(p)
        return xi * xi - 4.0 * self.f * (eta + self.f)


def parabola_from_focus_and_point(
    focus: Sequence[float], p: Sequence[float], opening: Sequence[float]
) -> Parabola2:
    """Parabola with the given focus and opening axis passing through ``p``.

    Of the two axis-aligned parabolas through ``p`` this returns the one
    concave toward the focus (directrix behind the vertex), so axis-parallel
    rays reflect through the focus.  ``f = (|p-F| - <p-F, axis>) / 2``.
    """
    focus = np.asarray(focus, dtype=np.float64)
    d = np.asarray(p, dtype=np.float64) - focus
    u = unit(opening)
    dist = float(np.linalg.norm(d))
    f = 0.5 * (dist - float(np.dot(d, u)))
    if f <= 0.0 or dist == 0.0:
        raise DegenerateParabola(
            "point lies on the opening ray from the focus; focal length is zero"
        )
    return Parabola2(focus, u, f)


@dataclass(frozen=True)
class ParabolicArc2:
    """Arc of a parabola over the closed transverse interval [xi_lo, xi_hi]."""

    parabola: Parabola2
    xi_lo: float
    xi_hi: float

    def __post_init__(self):
        if not self.xi_lo < self.xi_hi:
            raise ValueError("arc needs xi_lo < xi_hi")

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.parabola.point_at(self.xi_lo), self.parabola.point_at(self.xi_hi)

    def sample(self, n: int) -> np.ndarray:
        xs = np.linspace(self.xi_lo, self.xi_hi, n)
        pa = self.parabola
        return np.stack([pa.point_at(x) for x in xs])


@dataclass(frozen=True)
class Segment2:
    """Straight mirror (or wall) between two points."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.float64))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))

    def sample(self, n: int) -> np.ndarray:
        ts = np.linspace(0.0, 1.0, n)[:, None]
        return self.a[None, :] * (1.0 - ts) + self.b[None, :] * ts


Surface2 = Union[ParabolicArc2, Segment2]


@dataclass(frozen=True)
class Homothety2:
    """Scaling about a fixed center: ``p -> center + ratio * (p - center)``."""

    center: np.ndarray
    ratio: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64))
        if not self.ratio > 0.0:
            raise ValueError("homothety ratio must be positive")

    def apply(self, p: np.ndarray) -> np.ndarray:
        return self.center + self.ratio * (np.asarray(p, dtype=np.float64) - self.center)


def apply_homothety(h: Homothety2, p: Sequence[float]) -> np.ndarray:
    return h.apply(np.asarray(p, dtype=np.float64))


@dataclass(frozen=True)
class Hit:
    """Nearest admissible ray-surface intersection."""

    t: float
    point: np.ndarray
    normal: np.ndarray
    surface_id: int
    at_boundary: bool


@dataclass(frozen=True)
class CylinderPatch3:
    """Trimmed parabolic-cylinder (or planar) patch, sign-resolved.

    In cell coordinates ``s = sign_u * x[axis_u]`` (profile),
    ``w = x[axis_w]`` (graph value) and ``t = x[axis_t]`` (extrusion) the
    surface is ``sign_w * w = A s**2 + B s + C`` over ``s in [s_lo, s_hi]``,
    trimmed to ``t_lo <= sign_t * t <= sign_w * w``.  ``A = 0`` gives the
    planar diagonal facets of the level-0 cells.
    """

    axis_u: int
    axis_w: int
    axis_t: int
    sign_u: float
    sign_w: float
    sign_t: float
    A: float
    B: float
    C: float
    s_lo: float
    s_hi: float
    t_lo: float
    surface_id: int = -1
    tag: str = ""

    def value(self, s: float) -> float:
        return (self.A * s + self.B) * s + self.C

    def contains_footprint(self, pt: np.ndarray) -> bool:
        """Trim test for a point assumed to lie on the surface graph."""
        s = self.sign_u * pt[self.axis_u]
        if not (self.s_lo <= s <= self.s_hi):
            return False
        tt = self.sign_t * pt[self.axis_t]
        return self.t_lo <= tt <= self.value(s)


def _solve_graph_quadratic(
    a: float, b: float, c: float, graze_eps: float
) -> tuple[int, float, float]:
    """Ascending real roots of ``a t^2 + b t + c = 0`` (0, 1 or 2 of them).

    Near-tangent quadratics (|disc| < graze_eps) count as no intersection.
    """
    if a == 0.0:
        if b == 0.0:
            return 0, 0.0, 0.0
        return 1, -c / b, 0.0
    disc = b * b - 4.0 * a * c
    if disc < graze_eps:
        return 0, 0.0, 0.0
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else math.sqrt(disc) * 0.5
    if q == 0.0:
        t1 = -sq / (2.0 * a)
        t2 = sq / (2.0 * a)
    else:
        t1 = q / a
        t2 = c / q
    if t1 > t2:
        t1, t2 = t2, t1
    return 2, t1, t2


def intersect_ray_arc(
    ray: Ray,
    arc: ParabolicArc2,
    t_eps: float,
    rim_eps: float = 0.0,
    graze_eps: float = 0.0,
    surface_id: int = -1,
) -> Optional[Hit]:
    """Nearest hit with ``t > t_eps`` whose xi lies in the arc interval.

    The returned normal is oriented against the incoming direction.
    """
    pa = arc.parabola
    xh, yh = pa.xhat, pa.axis
    rel = ray.origin - pa.focus
    xi0 = float(np.dot(rel, xh))
    eta0 = float(np.dot(rel, yh))
    dxi = float(np.dot(ray.direction, xh))
    deta = float(np.dot(ray.direction, yh))
    kap = 1.0 / (4.0 * pa.f)
    a = kap * dxi * dxi
    b = 2.0 * kap * xi0 * dxi - deta
    c = kap * xi0 * xi0 - pa.f - eta0
    nroots, t1, t2 = _solve_graph_quadratic(a, b, c, graze_eps)
    for t in (t1, t2)[:nroots]:
        if t <= t_eps:
            continue
        xi = xi0 + t * dxi
        if arc.xi_lo <= xi <= arc.xi_hi:
            point = ray.at(t)
            g = -(2.0 * kap * xi) * xh + yh
            n = g / float(np.linalg.norm(g))
            if float(np.dot(n, ray.direction)) > 0.0:
                n = -n
            rim = min(xi - arc.xi_lo, arc.xi_hi - xi) < rim_eps
            return Hit(t, point, n, surface_id, rim)
    return None


def intersect_ray_segment(
    ray: Ray,
    seg: Segment2,
    t_eps: float,
    rim_eps: float = 0.0,
    surface_id: int = -1,
) -> Optional[Hit]:
    tang = seg.b - seg.a
    length = float(np.linalg.norm(tang))
    xh = tang / length
    yh = rot90(xh)
    rel = ray.origin - seg.a
    eta0 = float(np.dot(rel, yh))
    deta = float(np.dot(ray.direction, yh))
    if deta == 0.0:
        return None
    t = -eta0 / deta
    if t <= t_eps:
        return None
    xi = float(np.dot(rel, xh)) + t * float(np.dot(ray.direction, xh))
    if not (0.0 <= xi <= length):
        return None
    n = yh if float(np.dot(yh, ray.direction)) < 0.0 else -yh
    rim = min(xi, length - xi) < rim_eps
    return Hit(t, ray.at(t), n, surface_id, rim)


def intersect_ray_surface(
    ray: Ray,
    surface: Surface2,
    t_eps: float,
    rim_eps: float = 0.0,
    graze_eps: float = 0.0,
    surface_id: int = -1,
) -> Optional[Hit]:
    if isinstance(surface, ParabolicArc2):
        return intersect_ray_arc(ray, surface, t_eps, rim_eps, graze_eps, surface_id)
    return intersect_ray_segment(ray, surface, t_eps, rim_eps, surface_id)


def intersect_ray_patch(
    ray: Ray,
    patch: CylinderPatch3,
    t_eps: float,
    rim_eps: float = 0.0,
    graze_eps: float = 0.0,
) -> Optional[Hit]:
    """Nearest admissible hit on a trimmed patch (3D companion of the arcs)."""
    o, d = ray.origin, ray.direction
    iu, iw, it = patch.axis_u, patch.axis_w, patch.axis_t
    s0 = patch.sign_u * o[iu]
    ds = patch.sign_u * d[iu]
    w0 = patch.sign_w * o[iw]
    dw = patch.sign_w * d[iw]
    a = patch.A * ds * ds
    b = 2.0 * patch.A * s0 * ds + patch.B * ds - dw
    c = (patch.A * s0 + patch.B) * s0 + patch.C - w0
    nroots, t1, t2 = _solve_graph_quadratic(a, b, c, graze_eps)
    for t in (t1, t2)[:nroots]:
        if t <= t_eps:
            continue
        s = s0 + t * ds
        if not (patch.s_lo <= s <= patch.s_hi):
            continue
        tt = patch.sign_t * (o[it] + t * d[it])
        wv = patch.value(s)
        if not (patch.t_lo <= tt <= wv):
            continue
        g = np.zeros(3)
        g[iw] = patch.sign_w
        g[iu] = -patch.sign_u * (2.0 * patch.A * s + patch.B)
        n = g / float(np.linalg.norm(g))
        if float(np.dot(n, d)) > 0.0:
            n = -n
        rim = (
            min(s - patch.s_lo, patch.s_hi - s, tt - patch.t_lo, wv - tt) < rim_eps
        )
        return Hit(float(t), ray.at(float(t)), n, patch.surface_id, rim)
    return None


def scaled_eps(scene_diameter: float) -> tuple[float, float, float]:
    """(t_eps, rim_eps, graze_eps) resolved for a given scene diameter."""
    return (
        MIN_ADVANCE_REL * scene_diameter,
        RIM_PROXIMITY_REL * scene_diameter,
        (GRAZE_DISC_REL * scene_diameter) * scene_diameter,
    )
