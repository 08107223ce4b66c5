"""3D body invisible along the three coordinate axes.

Six sub-bodies are generated from one template by permuting coordinates.
The template ("yz") takes the orthogonal 2D construction in the (y, z) plane,
extrudes it along x over ``c1 <= |x| <= c`` and keeps only the part inside
the double pyramid where ``|z| >= max(|x|, |y|)``; the result is the union
over levels i of

    c_{i+1} <= |y| <= c_i,  inner_i(|y|) <= |z| <= outer_i(|y|),
    c1 <= |x| <= |z|,

where ``outer_i`` / ``inner_i`` are the level profiles of the 2D body
(``inner_0(s) = s``, the pyramid facet).  A sub-body named ``uw`` reads: the
profile runs over ``|u|``, the mirrors face the w axis (whose flow it serves),
and the third axis is the extrusion.  The two sub-bodies with ``w = z`` form
the piece invisible along z, and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidSeed
from .geom import CylinderPatch3
from .sequences import SequencePair

AXES = "xyz"

# (name, profile axis u, graph axis w, extrusion axis t)
SUBBODIES = (
    ("yz", 1, 2, 0),
    ("xz", 0, 2, 1),
    ("zy", 2, 1, 0),
    ("xy", 0, 1, 2),
    ("zx", 2, 0, 1),
    ("yx", 1, 0, 2),
)

SUBBODY_INDEX = {name: k for k, (name, _, _, _) in enumerate(SUBBODIES)}


@dataclass(frozen=True)
class Pyramid:
    """Region of the cube where one signed coordinate dominates the others."""

    axis: int
    sign: int  # +1, -1, or 0 for the double pyramid
    c: float

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        w = pts[:, self.axis]
        others = [k for k in range(3) if k != self.axis]
        m = np.maximum(np.abs(pts[:, others[0]]), np.abs(pts[:, others[1]]))
        lead = np.abs(w) if self.sign == 0 else self.sign * w
        return (lead >= m) & (np.abs(pts).max(axis=1) <= self.c)


def pyramid_contains(p: Pyramid, pt) -> bool:
    return bool(p.contains(np.asarray(pt, dtype=np.float64))[0])


@dataclass(frozen=True)
class Gallery:
    """Box along one cube edge direction: both transverse coordinates in
    a signed copy of [c1, c], the long coordinate free in [-c, c]."""

    axis: int  # the long direction
    eps: tuple[int, int]  # signs for the other two axes, in index order
    c: float
    c1: float

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        others = [k for k in range(3) if k != self.axis]
        ok = np.abs(pts[:, self.axis]) <= self.c
        for e, ax in zip(self.eps, others):
            v = e * pts[:, ax]
            ok &= (v >= self.c1) & (v <= self.c)
        return ok


def gallery_contains(g: Gallery, pt) -> bool:
    return bool(g.contains(np.asarray(pt, dtype=np.float64))[0])


def galleries_for_axis(axis: int, c: float, c1: float) -> list[Gallery]:
    return [
        Gallery(axis, (ea, eb), c, c1)
        for ea in (1, -1)
        for eb in (1, -1)
    ]


def _profile_coeffs(c: float, cut: float, offset: float) -> tuple[float, float, float]:
    """(A, B, C) with value(s) = A s^2 + B s + C for one side-hugging parabola."""
    span = cut + offset
    return 1.0 / (2.0 * span), offset / span, offset * offset / (2.0 * span) + c - span / 2.0


class Body3D:
    def __init__(self, c: float, c1: float, seq: SequencePair, n: int):
        if n != seq.depth:
            raise InvalidSeed(f"depth {n} does not match sequence depth {seq.depth}")
        if float(seq.cuts[0]) != c or float(seq.cuts[1]) != c1:
            raise InvalidSeed("sequence cuts must start with (c, c1)")
        self.c = float(c)
        self.c1 = float(c1)
        self.seq = seq
        self.depth = n
        self.thin = seq.thin
        self._build_profiles()
        self._build_patches()

    def _build_profiles(self) -> None:
        n, c = self.depth, self.c
        outer, inner = [], []
        for i in range(n):
            cut = float(self.seq.cuts[i])
            outer.append(_profile_coeffs(c, cut, self.seq.offset(i + 1)))
            if i == 0:
                inner.append((0.0, 1.0, 0.0))  # pyramid facet |w| = |u|
            else:
                inner.append(_profile_coeffs(c, cut, self.seq.offset(i)))
        self.outer_coeffs = np.array(outer)
        self.inner_coeffs = np.array(inner)

    def _build_patches(self) -> None:
        patches: list[CylinderPatch3] = []
        signs = [
            (su, sw, st)
            for su in (1.0, -1.0)
            for sw in (1.0, -1.0)
            for st in (1.0, -1.0)
        ]
        for name, iu, iw, it in SUBBODIES:
            for i in range(self.depth):
                s_lo, s_hi = float(self.seq.cuts[i + 1]), float(self.seq.cuts[i])
                rows = [("outer", self.outer_coeffs[i])]
                if i == 0 or not self.thin:
                    rows.append(("inner", self.inner_coeffs[i]))
                for kind, (A, B, C) in rows:
                    for su, sw, st in signs:
                        sgn = f"{'+' if su > 0 else '-'}{'+' if sw > 0 else '-'}{'+' if st > 0 else '-'}"
                        patches.append(
                            CylinderPatch3(
                                iu, iw, it, su, sw, st,
                                float(A), float(B), float(C),
                                s_lo, s_hi, self.c1,
                                surface_id=len(patches),
                                tag=f"{name}:{kind}:{i}:{sgn}",
                            )
                        )
        self.patches = patches

    # -- membership ---------------------------------------------------------

    def subbody_membership(self, name: str, pts, inset: float = 0.0) -> np.ndarray:
        k = SUBBODY_INDEX[name]
        _, iu, iw, it = SUBBODIES[k]
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        s = np.abs(pts[:, iu])
        w = np.abs(pts[:, iw])
        tt = np.abs(pts[:, it])
        asc = np.ascontiguousarray(self.seq.cuts[::-1])
        j = np.searchsorted(asc, s, side="right") - 1
        valid = (j >= 0) & (j <= self.depth - 1)
        # Points exactly on the outermost cut belong to level 0.
        on_outer = s == asc[-1]
        valid |= on_outer
        lev = np.clip(self.depth - 1 - j, 0, self.depth - 1)
        ao, bo, co = self.outer_coeffs[lev].T
        ai, bi, ci = self.inner_coeffs[lev].T
        outer_v = (ao * s + bo) * s + co
        inner_v = (ai * s + bi) * s + ci
        ok = valid
        ok &= (s >= self.seq.cuts[lev + 1] + inset) & (s <= self.seq.cuts[lev] - inset)
        ok &= (w >= inner_v + inset) & (w <= outer_v - inset)
        ok &= (tt >= self.c1 + inset) & (tt <= np.minimum(w, self.c) - inset)
        return ok

    def membership(self, pts, inset: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        out = np.zeros(len(pts), dtype=bool)
        for name, _, _, _ in SUBBODIES:
            out |= self.subbody_membership(name, pts, inset)
        return out

    def subbody_region(
        self, names: Sequence[str], inset: float
    ) -> Callable[[np.ndarray], np.ndarray]:
        def contains(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
            out = np.zeros(len(pts), dtype=bool)
            for nm in names:
                out |= self.subbody_membership(nm, pts, inset)
            return out

        return contains

    # -- queries --------------------------------------------------------------

    @property
    def empty_band(self) -> float:
        return float(self.seq.cuts[-1])

    @property
    def complete_aperture(self) -> float:
        """Smallest profile abscissa with both mirrors of the pair built."""
        return float(self.seq.cuts[-2])

    @property
    def scene_diameter(self) -> float:
        """Longest bounding-box extent: the cube edge."""
        return 2.0 * self.c

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return -self.c * np.ones(3), self.c * np.ones(3)

    def outer_value(self, level: int, s):
        a, b, c0 = self.outer_coeffs[level]
        s = np.asarray(s, dtype=np.float64)
        return (a * s + b) * s + c0

    def inner_value(self, level: int, s):
        a, b, c0 = self.inner_coeffs[level]
        s = np.asarray(s, dtype=np.float64)
        return (a * s + b) * s + c0

    def level_of(self, s: float) -> int:
        """Level index i with cuts[i+1] <= s <= cuts[i]; raises outside."""
        cuts = self.seq.cuts
        if not (cuts[-1] <= s <= cuts[0]):
            raise ValueError(f"abscissa {s} outside the constructed ladder")
        asc = np.ascontiguousarray(cuts[::-1])
        j = int(np.searchsorted(asc, s, side="right")) - 1
        return min(self.depth - 1, self.depth - 1 - j) if j >= 0 else self.depth - 1


def build_body3(c: float, c1: float, seq: SequencePair, n: int) -> Body3D:
    return Body3D(c, c1, seq, n)
