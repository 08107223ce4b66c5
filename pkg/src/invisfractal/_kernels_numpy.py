"""Pure-numpy batch tracer: all rays advance in lockstep, one bounce per pass.

Semantics match the numba kernels: nearest admissible hit with t > t_eps,
near-tangent quadratics discarded, ties within ``tie`` resolved toward the
lowest surface id, rim hits terminal.
"""

from __future__ import annotations

import numpy as np

EXITED, SINGULAR, CAP, WALL = 0, 1, 2, 3

_CHUNK_ELEMS = 4_000_000  # cap on rays x surfaces per vector pass


def _nearest2d(O, D, tab, t_eps, graze, tie):
    ex, ey = tab["ex"], tab["ey"]
    hx, hy = tab["hx"], tab["hy"]
    kap, lam, mu = tab["kap"], tab["lam"], tab["mu"]
    xlo, xhi = tab["xlo"], tab["xhi"]

    # Frame coordinates of origins/directions: xi along (hx, hy),
    # eta along the ccw-rotated (-hy, hx).
    xi0 = O[:, 0:1] * hx + O[:, 1:2] * hy - (ex * hx + ey * hy)
    eta0 = -O[:, 0:1] * hy + O[:, 1:2] * hx - (-ex * hy + ey * hx)
    dxi = D[:, 0:1] * hx + D[:, 1:2] * hy
    deta = -D[:, 0:1] * hy + D[:, 1:2] * hx

    aa = kap * dxi * dxi
    bb = 2.0 * kap * xi0 * dxi + lam * dxi - deta
    cc = (kap * xi0 + lam) * xi0 + mu - eta0

    best = np.full(xi0.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        lin = aa == 0.0
        t_lin = np.where(lin & (bb != 0.0), -cc / bb, np.inf)
        disc = bb * bb - 4.0 * aa * cc
        quad_ok = (~lin) & (disc >= graze)
        sq = np.sqrt(np.where(disc > 0.0, disc, 0.0))
        q = -0.5 * (bb + np.where(bb >= 0.0, sq, -sq))
        t1 = np.where(quad_ok, q / aa, np.inf)
        t2 = np.where(quad_ok & (q != 0.0), cc / q, np.inf)
        for t in (t_lin, t1, t2):
            xi = xi0 + t * dxi
            ok = (t > t_eps) & (xi >= xlo) & (xi <= xhi) & np.isfinite(t)
            best = np.where(ok & (t < best), t, best)

    t_min = best.min(axis=1)
    has = np.isfinite(t_min)
    j = np.argmax(best <= (t_min[:, None] + tie), axis=1)
    return t_min, j, has


def _nearest3d(O, D, tab, t_eps, graze, tie):
    iu, iw, it = tab["iu"], tab["iw"], tab["it"]
    su, sw, st = tab["su"], tab["sw"], tab["st"]
    A, B, C = tab["A"], tab["B"], tab["C"]
    slo, shi, tlo = tab["slo"], tab["shi"], tab["tlo"]

    s0 = su * O[:, iu]
    w0 = sw * O[:, iw]
    tt0 = st * O[:, it]
    ds = su * D[:, iu]
    dw = sw * D[:, iw]
    dt = st * D[:, it]

    aa = A * ds * ds
    bb = 2.0 * A * s0 * ds + B * ds - dw
    cc = (A * s0 + B) * s0 + C - w0

    best = np.full(s0.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        lin = aa == 0.0
        t_lin = np.where(lin & (bb != 0.0), -cc / bb, np.inf)
        disc = bb * bb - 4.0 * aa * cc
        quad_ok = (~lin) & (disc >= graze)
        sq = np.sqrt(np.where(disc > 0.0, disc, 0.0))
        q = -0.5 * (bb + np.where(bb >= 0.0, sq, -sq))
        t1 = np.where(quad_ok, q / aa, np.inf)
        t2 = np.where(quad_ok & (q != 0.0), cc / q, np.inf)
        for t in (t_lin, t1, t2):
            s = s0 + t * ds
            wv = (A * s + B) * s + C
            tt = tt0 + t * dt
            ok = (
                (t > t_eps)
                & np.isfinite(t)
                & (s >= slo)
                & (s <= shi)
                & (tt >= tlo)
                & (tt <= wv)
            )
            best = np.where(ok & (t < best), t, best)

    t_min = best.min(axis=1)
    has = np.isfinite(t_min)
    j = np.argmax(best <= (t_min[:, None] + tie), axis=1)
    return t_min, j, has


def _chunked_nearest(O, D, tab, n_surf, t_eps, graze, tie, nearest):
    m = O.shape[0]
    rows_per = max(1, _CHUNK_ELEMS // max(1, n_surf))
    if m <= rows_per:
        return nearest(O, D, tab, t_eps, graze, tie)
    ts = np.empty(m)
    js = np.empty(m, dtype=np.int64)
    hs = np.empty(m, dtype=bool)
    for lo in range(0, m, rows_per):
        hi = min(m, lo + rows_per)
        ts[lo:hi], js[lo:hi], hs[lo:hi] = nearest(
            O[lo:hi], D[lo:hi], tab, t_eps, graze, tie
        )
    return ts, js, hs


def _rim_and_normal2(O, D, t, j, tab, rim_eps):
    hx = tab["hx"][j]
    hy = tab["hy"][j]
    kap, lam = tab["kap"][j], tab["lam"][j]
    ex, ey = tab["ex"][j], tab["ey"][j]
    px = O[:, 0] + t * D[:, 0]
    py = O[:, 1] + t * D[:, 1]
    xi = (px - ex) * hx + (py - ey) * hy
    rim = np.minimum(xi - tab["xlo"][j], tab["xhi"][j] - xi) < rim_eps
    slope = 2.0 * kap * xi + lam
    gx = -slope * hx + (-hy)
    gy = -slope * hy + hx
    nrm = np.sqrt(gx * gx + gy * gy)
    gx /= nrm
    gy /= nrm
    flip = gx * D[:, 0] + gy * D[:, 1] > 0.0
    gx = np.where(flip, -gx, gx)
    gy = np.where(flip, -gy, gy)
    return np.stack([px, py], axis=1), np.stack([gx, gy], axis=1), rim


def _rim_and_normal3(O, D, t, j, tab, rim_eps):
    iu, iw, it = tab["iu"][j], tab["iw"][j], tab["it"][j]
    su, sw, st = tab["su"][j], tab["sw"][j], tab["st"][j]
    A, B = tab["A"][j], tab["B"][j]
    P = O + t[:, None] * D
    rows = np.arange(len(j))
    s = su * P[rows, iu]
    tt = st * P[rows, it]
    wv = (A * s + B) * s + tab["C"][j]
    rim = (
        np.minimum(
            np.minimum(s - tab["slo"][j], tab["shi"][j] - s),
            np.minimum(tt - tab["tlo"][j], wv - tt),
        )
        < rim_eps
    )
    g = np.zeros_like(P)
    g[rows, iw] = sw
    g[rows, iu] = -su * (2.0 * A * s + B)
    nrm = np.linalg.norm(g, axis=1)
    g /= nrm[:, None]
    flip = np.einsum("ij,ij->i", g, D) > 0.0
    g[flip] = -g[flip]
    return P, g, rim


def trace_batch_numpy(origins, dirs, scene, t_eps, rim_eps, graze, tie):
    dim = scene.dim
    tab = scene.tables
    n_surf = scene.n_surfaces
    max_b = scene.max_bounces
    m = origins.shape[0]
    k_slots = max_b + 1

    status = np.full(m, -1, dtype=np.int8)
    nrefl = np.zeros(m, dtype=np.int32)
    nevents = np.zeros(m, dtype=np.int32)
    pts = np.zeros((m, k_slots, dim))
    douts = np.zeros((m, k_slots, dim))
    sids = np.full((m, k_slots), -1, dtype=np.int32)

    O = np.array(origins, dtype=np.float64)
    D = np.array(dirs, dtype=np.float64)
    alive = np.arange(m)
    nearest = _nearest2d if dim == 2 else _nearest3d
    rim_normal = _rim_and_normal2 if dim == 2 else _rim_and_normal3

    if n_surf == 0:
        status[:] = EXITED
        return status, nrefl, nevents, pts, douts, sids

    for step in range(max_b + 1):
        if alive.size == 0:
            break
        t, j, has = _chunked_nearest(
            O[alive], D[alive], tab, n_surf, t_eps, graze, tie, nearest
        )
        status[alive[~has]] = EXITED
        sub = alive[has]
        if sub.size == 0:
            break
        t, j = t[has], j[has]
        P, N, rim = rim_normal(O[sub], D[sub], t, j, tab, rim_eps)
        is_wall = scene.wall[j].astype(bool)

        term = rim | is_wall
        term_rows = sub[term]
        if term_rows.size:
            status[term_rows] = np.where(rim[term], SINGULAR, WALL)
            pts[term_rows, step] = P[term]
            douts[term_rows, step] = D[term_rows]
            sids[term_rows, step] = j[term]
            nevents[term_rows] = step + 1

        go = ~term
        go_rows = sub[go]
        if go_rows.size == 0:
            alive = np.empty(0, dtype=np.int64)
            continue
        if step == max_b:
            status[go_rows] = CAP
            nevents[go_rows] = step
            alive = np.empty(0, dtype=np.int64)
            continue

        Dg = D[go_rows]
        Ng = N[go]
        dn = np.einsum("ij,ij->i", Dg, Ng)
        Dn = Dg - 2.0 * dn[:, None] * Ng
        Dn /= np.linalg.norm(Dn, axis=1)[:, None]
        pts[go_rows, step] = P[go]
        douts[go_rows, step] = Dn
        sids[go_rows, step] = j[go]
        nrefl[go_rows] = step + 1
        nevents[go_rows] = step + 1
        O[go_rows] = P[go]
        D[go_rows] = Dn
        alive = go_rows

    return status, nrefl, nevents, pts, douts, sids
