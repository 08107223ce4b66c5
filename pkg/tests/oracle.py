"""Independent brute-force tracer: dense parameter sweep plus bisection.

Finds ray-surface intersections by marching the ray parameter in small
steps, watching the sign of the local graph residual, and bisecting each
sign change; normals come from finite-difference tangents.  Shares no
intersection code with the package kernels.
"""

import numpy as np
from numba import njit


def scene_oracle_tables(scene):
    tab = scene.tables
    n = scene.n_surfaces
    centers = np.zeros((n, 2))
    radii = np.zeros(n)
    for j, obj in enumerate(scene.surfaces):
        pts = obj.sample(64)
        c = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
        centers[j] = c
        radii[j] = np.linalg.norm(pts - c, axis=1).max() + 1e-9
    return (
        tab["ex"], tab["ey"], tab["hx"], tab["hy"],
        tab["kap"], tab["lam"], tab["mu"], tab["xlo"], tab["xhi"],
        centers, radii,
    )


@njit(cache=True)
def _residual(ox, oy, dx, dy, t, ex, ey, hx, hy, kap, lam, mu, xlo, xhi):
    px = ox + t * dx - ex
    py = oy + t * dy - ey
    xi = px * hx + py * hy
    if xi < xlo or xi > xhi:
        return np.nan
    eta = -px * hy + py * hx
    return eta - ((kap * xi + lam) * xi + mu)


@njit(cache=True)
def _sweep_surface(ox, oy, dx, dy, j, tabs, step, t_start, t_stop):
    ex, ey, hx, hy, kap, lam, mu, xlo, xhi, centers, radii = tabs
    # Clip to the surface's bounding circle.
    cx = centers[j, 0] - ox
    cy = centers[j, 1] - oy
    proj = cx * dx + cy * dy
    perp2 = cx * cx + cy * cy - proj * proj
    r2 = radii[j] * radii[j]
    if perp2 > r2:
        return -1.0
    half = np.sqrt(r2 - perp2)
    lo = max(t_start, proj - half)
    hi = min(t_stop, proj + half)
    if hi <= lo:
        return -1.0
    prev_t = lo
    prev_g = _residual(ox, oy, dx, dy, lo, ex[j], ey[j], hx[j], hy[j],
                       kap[j], lam[j], mu[j], xlo[j], xhi[j])
    t = lo
    while t < hi:
        t = min(t + step, hi)
        g = _residual(ox, oy, dx, dy, t, ex[j], ey[j], hx[j], hy[j],
                      kap[j], lam[j], mu[j], xlo[j], xhi[j])
        if not np.isnan(g) and not np.isnan(prev_g) and (g == 0.0 or g * prev_g < 0.0):
            a, b = prev_t, t
            for _ in range(90):
                mid = 0.5 * (a + b)
                gm = _residual(ox, oy, dx, dy, mid, ex[j], ey[j], hx[j], hy[j],
                               kap[j], lam[j], mu[j], xlo[j], xhi[j])
                if np.isnan(gm):
                    break
                if gm == 0.0:
                    a = b = mid
                    break
                if gm * prev_g < 0.0:
                    b = mid
                else:
                    a = mid
            return 0.5 * (a + b)
        prev_t, prev_g = t, g
    return -1.0


@njit(cache=True)
def oracle_trace(origins, dirs, tabs, step, t_eps, max_b, t_stop,
                 out_nrefl, out_pts):
    n_surf = tabs[0].shape[0]
    for r in range(origins.shape[0]):
        ox, oy = origins[r, 0], origins[r, 1]
        dx, dy = dirs[r, 0], dirs[r, 1]
        for step_i in range(max_b):
            best_t = -1.0
            best_j = -1
            for j in range(n_surf):
                t = _sweep_surface(ox, oy, dx, dy, j, tabs, step, t_eps, t_stop)
                if t > 0.0 and (best_t < 0.0 or t < best_t):
                    best_t = t
                    best_j = j
            if best_j < 0:
                break
            px = ox + best_t * dx
            py = oy + best_t * dy
            # Finite-difference tangent along the curve at the hit point.
            j = best_j
            ex, ey, hx, hy = tabs[0][j], tabs[1][j], tabs[2][j], tabs[3][j]
            kap, lam = tabs[4][j], tabs[5][j]
            xi = (px - ex) * hx + (py - ey) * hy
            d_xi = 1e-7
            slope0 = (kap * (xi + d_xi) + lam) * (xi + d_xi)
            slope1 = (kap * (xi - d_xi) + lam) * (xi - d_xi)
            d_eta = (slope0 - slope1) / (2.0 * d_xi)
            tx = hx - d_eta * hy
            ty = hy + d_eta * hx
            nx, ny = -ty, tx
            nn = np.sqrt(nx * nx + ny * ny)
            nx /= nn
            ny /= nn
            if nx * dx + ny * dy > 0.0:
                nx = -nx
                ny = -ny
            dot = dx * nx + dy * ny
            dx = dx - 2.0 * dot * nx
            dy = dy - 2.0 * dot * ny
            dn = np.sqrt(dx * dx + dy * dy)
            dx /= dn
            dy /= dn
            ox, oy = px, py
            out_pts[r, step_i, 0] = px
            out_pts[r, step_i, 1] = py
            out_nrefl[r] = step_i + 1


def run_oracle(scene, origins, dirs, step=None, max_b=16):
    tabs = scene_oracle_tables(scene)
    if step is None:
        step = 1e-6 * scene.scene_diameter
    t_eps = 1e-9 * scene.scene_diameter
    t_stop = 4.0 * scene.scene_diameter
    n = len(origins)
    nrefl = np.zeros(n, dtype=np.int64)
    pts = np.zeros((n, max_b, 2))
    oracle_trace(
        np.ascontiguousarray(origins), np.ascontiguousarray(dirs), tabs,
        step, t_eps, max_b, t_stop, nrefl, pts,
    )
    return nrefl, pts
