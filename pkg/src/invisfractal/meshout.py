"""OBJ-compatible tessellation of 3D scenes.

Each patch is gridded in its (profile, extrusion) parameter rectangle; a
quad survives only if all four corners satisfy the trim inequalities.  The
output lists positions then triangle faces; patches are open surfaces, so no
watertightness is implied.
"""

from __future__ import annotations

import numpy as np

from .errors import UnsupportedExport
from .geom import CylinderPatch3
from .scene import Scene

DEFAULT_GRID = (32, 8)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def patch_grid(patch: CylinderPatch3, nu: int, nv: int):
    """(vertices (nu+1)*(nv+1) x 3, accepted quad index pairs) for one patch."""
    s_vals = np.linspace(patch.s_lo, patch.s_hi, nu + 1)
    t_hi = max(patch.value(patch.s_lo), patch.value(patch.s_hi))
    t_vals = np.linspace(patch.t_lo, t_hi, nv + 1)
    ss, tt = np.meshgrid(s_vals, t_vals, indexing="ij")
    wv = (patch.A * ss + patch.B) * ss + patch.C
    verts = np.zeros(ss.shape + (3,))
    verts[..., patch.axis_u] = patch.sign_u * ss
    verts[..., patch.axis_w] = patch.sign_w * wv
    verts[..., patch.axis_t] = patch.sign_t * tt
    ok = (tt >= patch.t_lo) & (tt <= wv)
    quads = []
    for i in range(nu):
        for j in range(nv):
            if ok[i, j] and ok[i + 1, j] and ok[i, j + 1] and ok[i + 1, j + 1]:
                quads.append((i, j))
    return verts, quads


def count_accepted_quads(patch: CylinderPatch3, nu: int, nv: int) -> int:
    return len(patch_grid(patch, nu, nv)[1])


def export_mesh(scene: Scene, nu: int = DEFAULT_GRID[0], nv: int = DEFAULT_GRID[1]) -> str:
    """Tessellate every patch of a 3D scene into an OBJ text document."""
    if scene.dim != 3:
        raise UnsupportedExport("mesh export applies to 3D scenes only")
    lines = [f"# invisfractal mesh: {scene.n_surfaces} patches, grid {nu}x{nv}"]
    faces: list[str] = []
    base = 1  # OBJ indices are 1-based
    for patch in scene.surfaces:
        verts, quads = patch_grid(patch, nu, nv)
        flat = verts.reshape(-1, 3)
        for v in flat:
            lines.append(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}")
        cols = nv + 1
        for i, j in quads:
            a = base + i * cols + j
            b = base + (i + 1) * cols + j
            c = base + (i + 1) * cols + (j + 1)
            d = base + i * cols + (j + 1)
            faces.append(f"f {a} {b} {c}")
            faces.append(f"f {a} {c} {d}")
        base += len(flat)
    lines.extend(faces)
    return "\n".join(lines) + "\n"


def mesh_triangle_count(obj_text: str) -> int:
    return sum(1 for ln in obj_text.splitlines() if ln.startswith("f "))
