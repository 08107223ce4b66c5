"""SVG rendering of 2D scenes: arcs, filled pieces, optional traced rays."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .bodies2d import BOTTOM, TOP, Body2D
from .errors import UnsupportedExport
from .geom import ParabolicArc2, Ray
from .scene import Scene
from .trace import Status, trace

DEFAULT_ARC_SAMPLES = 128

_STYLE = (
    "path.arc{fill:none;stroke:#26415e;stroke-width:0.004}"
    "path.piece{fill:#9fb4c7;stroke:#26415e;stroke-width:0.002}"
    "path.wall{fill:none;stroke:#a04040;stroke-width:0.002}"
    "polyline.ray{fill:none;stroke:#c03020;stroke-width:0.003}"
)

# Level-0 pieces pair across the diagonal seams into the corner blocks.
_BLOCK_PARTNER = {TOP: {0: 3, 3: 0, 1: 2, 2: 1}, BOTTOM: {0: 2, 2: 0, 1: 3, 3: 1}}


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _path(points: np.ndarray, cls: str, close: bool = False) -> str:
    cmds = [f"M{_fmt(points[0, 0])} {_fmt(-points[0, 1])}"]
    for p in points[1:]:
        cmds.append(f"L{_fmt(p[0])} {_fmt(-p[1])}")
    if close:
        cmds.append("Z")
    return f'<path class="{cls}" d="{"".join(cmds)}"/>'


def _sample(surface, n: int) -> np.ndarray:
    return surface.sample(n)


def _piece_outline(piece, n: int) -> np.ndarray:
    """Closed outline: outer arc, right wall, inner boundary reversed."""
    outer = _sample(piece.outer, n)
    inner = _sample(piece.inner, n)[::-1]
    return np.concatenate([outer, inner])


def _block_outline(p1, p2, n: int) -> np.ndarray:
    """Two level-0 pieces joined across their shared seam."""
    out1 = _sample(p1.outer, n)
    out2 = _sample(p2.outer, n)
    # Orient both away from the shared rhombus vertex.
    apex = out1[0] if min(np.linalg.norm(out1[0] - out2[0]), np.linalg.norm(out1[0] - out2[-1])) < min(
        np.linalg.norm(out1[-1] - out2[0]), np.linalg.norm(out1[-1] - out2[-1])
    ) else out1[-1]
    if not np.array_equal(out1[0], apex):
        out1 = out1[::-1]
    if np.linalg.norm(out2[0] - apex) > np.linalg.norm(out2[-1] - apex):
        out2 = out2[::-1]
    w1 = np.stack([p1.wall.a, p1.wall.b])
    w2 = np.stack([p2.wall.a, p2.wall.b])
    path = [out1]
    far1 = out1[-1]
    if np.linalg.norm(w1[0] - far1) > np.linalg.norm(w1[1] - far1):
        w1 = w1[::-1]
    path.append(w1)
    seam_end = w1[-1]
    if np.linalg.norm(w2[0] - seam_end) > np.linalg.norm(w2[1] - seam_end):
        w2 = w2[::-1]
    path.append(w2)
    path.append(out2[::-1])
    return np.concatenate(path)


def render_svg(
    scene: Scene,
    rays: Sequence[Ray] = (),
    samples_per_arc: int = DEFAULT_ARC_SAMPLES,
    pad_rel: float = 0.05,
) -> str:
    """Deterministic SVG document for a 2D scene.

    One stroked path per arc, one filled path per solid piece (the level-0
    pairs merge into the corner blocks), wall segments stroked separately,
    and a polyline per traced ray (entry, reflections, exit extension).
    """
    if scene.dim != 2:
        raise UnsupportedExport("SVG export applies to 2D scenes only")
    lo, hi = scene.bbox_lo, scene.bbox_hi
    pad = pad_rel * scene.scene_diameter
    x0, y0 = lo[0] - pad, -(hi[1] + pad)
    w, h = (hi[0] - lo[0]) + 2 * pad, (hi[1] - lo[1]) + 2 * pad

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(x0)} {_fmt(y0)} '
        f'{_fmt(w)} {_fmt(h)}">',
        f"<style>{_STYLE}</style>",
    ]

    body = scene.body
    if isinstance(body, Body2D):
        drawn = set()
        for idx, piece in enumerate(body.pieces):
            if not piece.solid or idx in drawn:
                continue
            if piece.level == 0:
                partner_t = _BLOCK_PARTNER[piece.atom][piece.transform]
                pj = next(
                    k for k, q in enumerate(body.pieces)
                    if q.level == 0 and q.atom == piece.atom and q.transform == partner_t
                )
                parts.append(
                    _path(_block_outline(piece, body.pieces[pj], samples_per_arc),
                          "piece", close=True)
                )
                drawn.update((idx, pj))
            else:
                parts.append(_path(_piece_outline(piece, samples_per_arc), "piece", close=True))
                drawn.add(idx)
        for entry in body.surface_entries:
            if entry.kind == "arc":
                parts.append(_path(_sample(entry.surface, samples_per_arc), "arc"))
            elif entry.kind == "wall":
                parts.append(_path(_sample(entry.surface, 2), "wall"))
    else:
        for sid, obj in enumerate(scene.surfaces):
            cls = "wall" if scene.wall[sid] else "arc"
            n = samples_per_arc if isinstance(obj, ParabolicArc2) else 2
            parts.append(_path(_sample(obj, n), cls))

    for ray in rays:
        rec = trace(scene, ray)
        verts = [ray.origin] + [r.point for r in rec.reflections]
        if rec.status == Status.EXITED and rec.exit is not None:
            verts.append(rec.exit.origin + 1.2 * scene.scene_diameter * rec.exit.direction)
        pts = " ".join(f"{_fmt(p[0])},{_fmt(-p[1])}" for p in verts)
        parts.append(f'<polyline class="ray" points="{pts}"/>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def count_svg_elements(svg: str) -> dict:
    return {
        "arc_paths": svg.count('class="arc"'),
        "piece_paths": svg.count('class="piece"'),
        "wall_paths": svg.count('class="wall"'),
        "ray_polylines": svg.count('class="ray"'),
    }
