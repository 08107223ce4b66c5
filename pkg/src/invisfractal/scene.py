"""Tracer-facing scene assembly: flat surface tables plus metadata.

Every 2D surface is stored as a local-frame graph ``eta = kap*xi**2 + lam*xi
+ mu`` over a closed xi interval (arcs: frame at the focus, kap = 1/(4f),
mu = -f; straight segments: kap = lam = mu = 0).  Every 3D patch is the
sign-resolved graph described in :mod:`invisfractal.geom`.  The tables are
plain float arrays so both the numba and the numpy kernels consume them
directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bodies2d import Body2D
from .bodies3d import SUBBODY_INDEX, Body3D
from .geom import CylinderPatch3, ParabolicArc2, Segment2, Surface2, perp, rot90, unit

DEFAULT_MAX_BOUNCES = 64


@dataclass
class Scene:
    dim: int
    tables: dict
    tags: list
    wall: np.ndarray  # uint8 per surface
    bbox_lo: np.ndarray
    bbox_hi: np.ndarray
    scene_diameter: float
    max_bounces: int = DEFAULT_MAX_BOUNCES
    body: object = None
    surfaces: list = field(default_factory=list)  # scalar-path objects
    group_code: np.ndarray = None  # small int per surface for fast attribution

    @property
    def n_surfaces(self) -> int:
        return len(self.tags)


def _arc_row(arc: ParabolicArc2):
    pa = arc.parabola
    xh = perp(pa.axis)
    return (
        pa.focus[0], pa.focus[1], xh[0], xh[1],
        1.0 / (4.0 * pa.f), 0.0, -pa.f, arc.xi_lo, arc.xi_hi,
    )


def _segment_row(seg: Segment2):
    xh = unit(seg.b - seg.a)
    return (seg.a[0], seg.a[1], xh[0], xh[1], 0.0, 0.0, 0.0, 0.0, seg.length)


def scene2_from_surfaces(
    entries: Sequence[tuple[Surface2, str, bool]],
    bbox_lo,
    bbox_hi,
    scene_diameter: float,
    max_bounces: int = DEFAULT_MAX_BOUNCES,
    body=None,
    group_code: Optional[np.ndarray] = None,
) -> Scene:
    rows, tags, wall, objs = [], [], [], []
    for surface, tag, is_wall in entries:
        if isinstance(surface, ParabolicArc2):
            rows.append(_arc_row(surface))
        else:
            rows.append(_segment_row(surface))
        tags.append(tag)
        wall.append(1 if is_wall else 0)
        objs.append(surface)
    arr = np.array(rows, dtype=np.float64) if rows else np.zeros((0, 9))
    tables = {
        "ex": np.ascontiguousarray(arr[:, 0]),
        "ey": np.ascontiguousarray(arr[:, 1]),
        "hx": np.ascontiguousarray(arr[:, 2]),
        "hy": np.ascontiguousarray(arr[:, 3]),
        "kap": np.ascontiguousarray(arr[:, 4]),
        "lam": np.ascontiguousarray(arr[:, 5]),
        "mu": np.ascontiguousarray(arr[:, 6]),
        "xlo": np.ascontiguousarray(arr[:, 7]),
        "xhi": np.ascontiguousarray(arr[:, 8]),
    }
    if group_code is None:
        group_code = np.zeros(len(tags), dtype=np.int32)
    return Scene(
        2, tables, tags, np.array(wall, dtype=np.uint8),
        np.asarray(bbox_lo, dtype=np.float64), np.asarray(bbox_hi, dtype=np.float64),
        float(scene_diameter), max_bounces, body, objs, group_code,
    )


def scene_from_body2d(body: Body2D, max_bounces: int = DEFAULT_MAX_BOUNCES) -> Scene:
    entries = []
    codes = []
    for e in body.surface_entries:
        entries.append((e.surface, e.tag, e.kind == "wall"))
        codes.append(0 if e.piece.transform < 2 else 1)  # family A / family B
    lo, hi = body.bbox
    return scene2_from_surfaces(
        entries, lo, hi, body.scene_diameter, max_bounces, body,
        group_code=np.array(codes, dtype=np.int32),
    )


def scene_from_body3d(body: Body3D, max_bounces: int = DEFAULT_MAX_BOUNCES) -> Scene:
    p = body.patches
    n = len(p)
    tables = {
        "iu": np.array([q.axis_u for q in p], dtype=np.int64),
        "iw": np.array([q.axis_w for q in p], dtype=np.int64),
        "it": np.array([q.axis_t for q in p], dtype=np.int64),
        "su": np.array([q.sign_u for q in p], dtype=np.float64),
        "sw": np.array([q.sign_w for q in p], dtype=np.float64),
        "st": np.array([q.sign_t for q in p], dtype=np.float64),
        "A": np.array([q.A for q in p], dtype=np.float64),
        "B": np.array([q.B for q in p], dtype=np.float64),
        "C": np.array([q.C for q in p], dtype=np.float64),
        "slo": np.array([q.s_lo for q in p], dtype=np.float64),
        "shi": np.array([q.s_hi for q in p], dtype=np.float64),
        "tlo": np.array([q.t_lo for q in p], dtype=np.float64),
    }
    tags = [q.tag for q in p]
    codes = np.array(
        [SUBBODY_INDEX[q.tag.split(":", 1)[0]] for q in p], dtype=np.int32
    )
    lo, hi = body.bbox
    return Scene(
        3, tables, tags, np.zeros(n, dtype=np.uint8), lo, hi,
        body.scene_diameter, max_bounces, body, list(p), codes,
    )


def flat_mirror_scene(
    a, b, scene_diameter: Optional[float] = None, max_bounces: int = DEFAULT_MAX_BOUNCES
) -> Scene:
    """Single reflecting segment; the basic resistance control scene."""
    seg = Segment2(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))
    lo = np.minimum(seg.a, seg.b) - 1e-9
    hi = np.maximum(seg.a, seg.b) + 1e-9
    diam = scene_diameter or max(float(np.linalg.norm(hi - lo)), seg.length)
    return scene2_from_surfaces([(seg, "mirror", False)], lo, hi, diam, max_bounces)
