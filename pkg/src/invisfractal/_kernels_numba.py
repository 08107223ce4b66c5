"""Numba per-ray tracer kernels; semantics mirror ``_kernels_numpy``.

Each kernel walks one ray at a time: scan all surfaces for the nearest
admissible hit (t > t_eps, domain/trim satisfied, near-tangency discarded,
ties to the lowest surface id), then reflect or terminate.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EXITED, SINGULAR, CAP, WALL = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def _roots(aa, bb, cc, graze):
    """Ascending real roots; near-tangent quadratics yield none."""
    if aa == 0.0:
        if bb == 0.0:
            return 0, 0.0, 0.0
        return 1, -cc / bb, 0.0
    disc = bb * bb - 4.0 * aa * cc
    if disc < graze:
        return 0, 0.0, 0.0
    sq = math.sqrt(disc)
    if bb >= 0.0:
        q = -0.5 * (bb + sq)
    else:
        q = -0.5 * (bb - sq)
    if q == 0.0:
        t1 = -sq / (2.0 * aa)
        t2 = sq / (2.0 * aa)
    else:
        t1 = q / aa
        t2 = cc / q
    if t1 > t2:
        t1, t2 = t2, t1
    return 2, t1, t2


@njit(cache=True, nogil=True)
def trace2d_numba(
    origins, dirs,
    ex, ey, hx, hy, kap, lam, mu, xlo, xhi, wall,
    t_eps, rim_eps, graze, tie, max_b,
    status, nrefl, nevents, pts, douts, sids,
):
    m = origins.shape[0]
    n = ex.shape[0]
    for r in range(m):
        ox = origins[r, 0]
        oy = origins[r, 1]
        dx = dirs[r, 0]
        dy = dirs[r, 1]
        step = 0
        while True:
            best_t = np.inf
            best_j = -1
            for j in range(n):
                hxx = hx[j]
                hyy = hy[j]
                xi0 = (ox - ex[j]) * hxx + (oy - ey[j]) * hyy
                eta0 = -(ox - ex[j]) * hyy + (oy - ey[j]) * hxx
                dxi = dx * hxx + dy * hyy
                deta = -dx * hyy + dy * hxx
                aa = kap[j] * dxi * dxi
                bb = 2.0 * kap[j] * xi0 * dxi + lam[j] * dxi - deta
                cc = (kap[j] * xi0 + lam[j]) * xi0 + mu[j] - eta0
                nr, t1, t2 = _roots(aa, bb, cc, graze)
                for k in range(nr):
                    t = t1 if k == 0 else t2
                    if t <= t_eps:
                        continue
                    xi = xi0 + t * dxi
                    if xi < xlo[j] or xi > xhi[j]:
                        continue
                    if t < best_t - tie:
                        best_t = t
                        best_j = j
                    break  # roots ascend; the first admissible is this surface's hit
            if best_j < 0:
                status[r] = EXITED
                break
            j = best_j
            px = ox + best_t * dx
            py = oy + best_t * dy
            xi = (px - ex[j]) * hx[j] + (py - ey[j]) * hy[j]
            rim_d = xi - xlo[j]
            if xhi[j] - xi < rim_d:
                rim_d = xhi[j] - xi
            if rim_d < rim_eps or wall[j] != 0:
                status[r] = SINGULAR if rim_d < rim_eps else WALL
                pts[r, step, 0] = px
                pts[r, step, 1] = py
                douts[r, step, 0] = dx
                douts[r, step, 1] = dy
                sids[r, step] = j
                nevents[r] = step + 1
                break
            if step == max_b:
                status[r] = CAP
                nevents[r] = step
                break
            slope = 2.0 * kap[j] * xi + lam[j]
            gx = -slope * hx[j] - hy[j]
            gy = -slope * hy[j] + hx[j]
            gn = math.sqrt(gx * gx + gy * gy)
            gx /= gn
            gy /= gn
            if gx * dx + gy * dy > 0.0:
                gx = -gx
                gy = -gy
            dn = dx * gx + dy * gy
            dx = dx - 2.0 * dn * gx
            dy = dy - 2.0 * dn * gy
            dnorm = math.sqrt(dx * dx + dy * dy)
            dx /= dnorm
            dy /= dnorm
            ox = px
            oy = py
            pts[r, step, 0] = px
            pts[r, step, 1] = py
            douts[r, step, 0] = dx
            douts[r, step, 1] = dy
            sids[r, step] = j
            step += 1
            nrefl[r] = step
            nevents[r] = step


@njit(cache=True, nogil=True)
def trace3d_numba(
    origins, dirs,
    iu, iw, it, su, sw, st, A, B, C, slo, shi, tlo, wall,
    t_eps, rim_eps, graze, tie, max_b,
    status, nrefl, nevents, pts, douts, sids,
):
    m = origins.shape[0]
    n = A.shape[0]
    o = np.empty(3)
    d = np.empty(3)
    for r in range(m):
        for k in range(3):
            o[k] = origins[r, k]
            d[k] = dirs[r, k]
        step = 0
        while True:
            best_t = np.inf
            best_j = -1
            for j in range(n):
                s0 = su[j] * o[iu[j]]
                w0 = sw[j] * o[iw[j]]
                tt0 = st[j] * o[it[j]]
                ds = su[j] * d[iu[j]]
                dw = sw[j] * d[iw[j]]
                dt = st[j] * d[it[j]]
                aa = A[j] * ds * ds
                bb = 2.0 * A[j] * s0 * ds + B[j] * ds - dw
                cc = (A[j] * s0 + B[j]) * s0 + C[j] - w0
                nr, t1, t2 = _roots(aa, bb, cc, graze)
                for k in range(nr):
                    t = t1 if k == 0 else t2
                    if t <= t_eps:
                        continue
                    s = s0 + t * ds
                    if s < slo[j] or s > shi[j]:
                        continue
                    tt = tt0 + t * dt
                    wv = (A[j] * s + B[j]) * s + C[j]
                    if tt < tlo[j] or tt > wv:
                        continue
                    if t < best_t - tie:
                        best_t = t
                        best_j = j
                    break
            if best_j < 0:
                status[r] = EXITED
                break
            j = best_j
            px = o[0] + best_t * d[0]
            py = o[1] + best_t * d[1]
            pz = o[2] + best_t * d[2]
            o[0] = px
            o[1] = py
            o[2] = pz
            s = su[j] * o[iu[j]]
            tt = st[j] * o[it[j]]
            wv = (A[j] * s + B[j]) * s + C[j]
            rim_d = s - slo[j]
            if shi[j] - s < rim_d:
                rim_d = shi[j] - s
            if tt - tlo[j] < rim_d:
                rim_d = tt - tlo[j]
            if wv - tt < rim_d:
                rim_d = wv - tt
            if rim_d < rim_eps or wall[j] != 0:
                status[r] = SINGULAR if rim_d < rim_eps else WALL
                for k in range(3):
                    pts[r, step, k] = o[k]
                    douts[r, step, k] = d[k]
                sids[r, step] = j
                nevents[r] = step + 1
                break
            if step == max_b:
                status[r] = CAP
                nevents[r] = step
                break
            gx = 0.0
            gy = 0.0
            gz = 0.0
            gw = sw[j]
            gu = -su[j] * (2.0 * A[j] * s + B[j])
            if iw[j] == 0:
                gx += gw
            elif iw[j] == 1:
                gy += gw
            else:
                gz += gw
            if iu[j] == 0:
                gx += gu
            elif iu[j] == 1:
                gy += gu
            else:
                gz += gu
            gn = math.sqrt(gx * gx + gy * gy + gz * gz)
            gx /= gn
            gy /= gn
            gz /= gn
            if gx * d[0] + gy * d[1] + gz * d[2] > 0.0:
                gx = -gx
                gy = -gy
                gz = -gz
            dn = d[0] * gx + d[1] * gy + d[2] * gz
            d[0] -= 2.0 * dn * gx
            d[1] -= 2.0 * dn * gy
            d[2] -= 2.0 * dn * gz
            dnorm = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
            d[0] /= dnorm
            d[1] /= dnorm
            d[2] /= dnorm
            for k in range(3):
                pts[r, step, k] = o[k]
                douts[r, step, k] = d[k]
            sids[r, step] = j
            step += 1
            nrefl[r] = step
            nevents[r] = step
