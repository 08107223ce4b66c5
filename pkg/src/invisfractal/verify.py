"""Statistical certification: invisibility, resistance, shading, case laws.

A flow is a parallel family of rays; a verification traces every ray that is
neither excluded (too close to a known singular locus, or inside the
truncation's incomplete annulus) nor singular, and checks that each exits
with its entry velocity along its entry line.  Exclusions are bookkept and
bounded, never hidden: the report carries the excluded fraction next to an
a-priori bound derived from the margin and the cut ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bodies2d import Body2D
from .bodies3d import SUBBODIES, SUBBODY_INDEX, Body3D, Pyramid
from .errors import CaseViolation, TracerAnomaly
from .geom import rot90, unit
from .scene import Scene
from .tolerances import (
    INVISIBILITY_TOL,
    REGION_INSET_REL,
    REPORT_GRADE_TOL,
    SHADING_STEP_REL,
)
from .trace import BatchTrace, Status, trace_batch

DEFAULT_MARGIN = 1e-6


@dataclass(frozen=True)
class FlowSpec:
    """Parallel flow: direction, sampling rule, and transverse cross-section.

    ``cross`` is one (lo, hi) offset interval in 2D and a pair of intervals
    in 3D, spanning a cross-section perpendicular to the direction that must
    cover the body's shadow.  ``mc`` sampling draws uniform offsets from a
    seeded generator; the grid rule uses cell midpoints so each ray carries
    an exact cell measure.
    """

    direction: np.ndarray
    n: int
    cross: tuple
    kind: str = "grid"  # "grid" | "mc"
    seed: int = 0
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        object.__setattr__(self, "direction", unit(self.direction))
        if self.kind not in ("grid", "mc"):
            raise ValueError(f"unknown sampling kind {self.kind!r}")


def default_flow(
    scene: Scene,
    direction,
    n: int,
    kind: str = "grid",
    seed: int = 0,
    margin: float = DEFAULT_MARGIN,
    pad_rel: float = 0.05,
) -> FlowSpec:
    """Flow whose cross-section covers the scene bbox shadow with a pad."""
    v = unit(direction)
    basis = _transverse_basis(v)
    corners = _bbox_corners(scene.bbox_lo, scene.bbox_hi)
    pad = pad_rel * scene.scene_diameter
    cross = tuple(
        (float((corners @ b).min() - pad), float((corners @ b).max() + pad))
        for b in basis
    )
    if scene.dim == 2:
        cross = cross[0]
    return FlowSpec(v, n, cross, kind, seed, margin)


def _bbox_corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    dim = len(lo)
    corners = []
    for mask in range(1 << dim):
        corners.append([hi[k] if mask >> k & 1 else lo[k] for k in range(dim)])
    return np.array(corners)


def _transverse_basis(v: np.ndarray) -> list[np.ndarray]:
    if len(v) == 2:
        return [rot90(v)]
    k = int(np.argmin(np.abs(v)))
    e = np.zeros(3)
    e[k] = 1.0
    b1 = np.cross(v, e)
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(v, b1)
    return [b1, b2]


def flow_rays(scene: Scene, flow: FlowSpec):
    """(origins, dirs, offsets, weight_per_ray) for a flow over the scene."""
    v = flow.direction
    basis = _transverse_basis(v)
    corners = _bbox_corners(scene.bbox_lo, scene.bbox_hi)
    back = float((corners @ v).min()) - 0.25 * scene.scene_diameter

    if scene.dim == 2:
        lo, hi = flow.cross
        if flow.kind == "grid":
            h = (hi - lo) / flow.n
            b = lo + (np.arange(flow.n) + 0.5) * h
        else:
            rng = np.random.default_rng(flow.seed)
            b = rng.uniform(lo, hi, flow.n)
            h = (hi - lo) / flow.n
        offsets = b[:, None]
        origins = b[:, None] * basis[0][None, :] + back * v[None, :]
        weight = h
    else:
        (lo1, hi1), (lo2, hi2) = flow.cross
        if flow.kind == "grid":
            side = max(1, int(round(math.sqrt(flow.n))))
            h1, h2 = (hi1 - lo1) / side, (hi2 - lo2) / side
            b1 = lo1 + (np.arange(side) + 0.5) * h1
            b2 = lo2 + (np.arange(side) + 0.5) * h2
            bb1, bb2 = np.meshgrid(b1, b2, indexing="ij")
            offsets = np.stack([bb1.ravel(), bb2.ravel()], axis=1)
            weight = h1 * h2
        else:
            rng = np.random.default_rng(flow.seed)
            offsets = np.stack(
                [rng.uniform(lo1, hi1, flow.n), rng.uniform(lo2, hi2, flow.n)], axis=1
            )
            weight = (hi1 - lo1) * (hi2 - lo2) / flow.n
        origins = offsets @ np.stack(basis) + back * v[None, :]
    dirs = np.tile(v, (len(origins), 1))
    return origins, dirs, offsets, float(weight)


def exclusion_mask(scene: Scene, flow: FlowSpec, origins: np.ndarray) -> np.ndarray:
    """Rays too close to singular loci or inside the incomplete annulus.

    2D: lines passing within ``margin`` of any surface rim point, plus (for
    body scenes) ladder offsets inside (empty_band - margin,
    complete_aperture + margin).  3D body scenes: either transverse
    coordinate near a cut, inside the annulus, or near the diagonal seam
    |u1| = |u2|.
    """
    m = flow.margin
    v = flow.direction
    excl = np.zeros(len(origins), dtype=bool)
    body = scene.body
    if scene.dim == 2:
        if isinstance(body, Body2D):
            rims = body.singular_points()
            p = rot90(v)
            line_off = origins @ p
            rim_off = rims @ p
            d = np.abs(line_off[:, None] - rim_off[None, :]).min(axis=1)
            excl |= d < m
            mat = body.ladder_offsets(v)
            if mat is not None:
                u = np.abs((origins @ mat.T)[:, 0])
                excl |= (u > body.empty_band - m) & (u < body.complete_aperture + m)
        elif scene.surfaces:
            rims = []
            for s in scene.surfaces:
                if hasattr(s, "endpoints"):
                    rims.extend(s.endpoints)
                else:
                    rims.extend((s.a, s.b))
            rims = np.stack(rims)
            p = rot90(v)
            d = np.abs(origins @ p - (rims @ p)[None, :].T).min(axis=0)
            excl |= d < m
    else:
        if isinstance(body, Body3D):
            axes = [k for k in range(3) if abs(v[k]) < 0.5]
            cuts = body.seq.cuts
            for ax in axes:
                u = np.abs(origins[:, ax])
                excl |= (np.abs(u[:, None] - cuts[None, :]).min(axis=1)) < m
                excl |= (u > body.empty_band - m) & (u < body.complete_aperture + m)
            u1 = np.abs(origins[:, axes[0]])
            u2 = np.abs(origins[:, axes[1]])
            excl |= np.abs(u1 - u2) < m
    return excl


@dataclass
class VerificationReport:
    direction: np.ndarray
    tau: float
    tau_report: float
    rays_total: int
    rays_excluded: int
    rays_singular: int
    histogram: dict
    max_velocity_dev: float
    max_lateral_dev: float
    resistance: np.ndarray
    resistance_per_width: np.ndarray
    invisible: bool
    zero_resistance: bool
    singular_ok: bool
    excluded_fraction: float
    excluded_bound: float
    band_analytic: Optional[float] = None
    band_measured: Optional[float] = None
    scene_diameter: float = 0.0
    meta: dict = field(default_factory=dict)

    def histogram_support(self) -> set:
        return {k for k, c in self.histogram.items() if c > 0}


def _lateral_dev(origins, exit_points, v) -> np.ndarray:
    d = exit_points - origins
    return np.linalg.norm(d - (d @ v)[:, None] * v[None, :], axis=1)


def _excluded_bound(scene: Scene, flow: FlowSpec) -> float:
    body = scene.body
    m = flow.margin
    if isinstance(body, (Body2D, Body3D)):
        n = body.depth
        c = float(body.seq.cuts[0])
        per_axis = (2 * (n + 1)) * (2 * m) + 2 * (body.complete_aperture + m)
        if scene.dim == 2:
            width = flow.cross[1] - flow.cross[0]
            return per_axis / width
        (lo1, hi1), (lo2, hi2) = flow.cross
        f1 = per_axis / (hi1 - lo1)
        f2 = per_axis / (hi2 - lo2)
        diag = 2.0 * 2.0 * m * 2.0 * c / ((hi1 - lo1) * (hi2 - lo2))
        return f1 + f2 + 2 * diag
    return 0.05


def verify_invisibility(
    scene: Scene,
    flow: FlowSpec,
    tau: float = INVISIBILITY_TOL,
    tau_report: float = REPORT_GRADE_TOL,
    backend: Optional[str] = None,
    jobs: int = 1,
    batch: Optional[BatchTrace] = None,
) -> VerificationReport:
    """Trace the flow and grade the invisibility verdicts at tolerance tau."""
    origins, dirs, offsets, weight = flow_rays(scene, flow)
    res = batch if batch is not None else trace_batch(scene, origins, dirs, backend, jobs)
    excl = exclusion_mask(scene, flow, origins)
    live = ~excl
    singular = live & (res.status == int(Status.SINGULAR_HIT))
    anomalous = live & (
        (res.status == int(Status.BOUNCE_CAP))
        | (res.status == int(Status.WALL_ANOMALY))
    )
    if np.any(anomalous):
        r = int(np.nonzero(anomalous)[0][0])
        raise TracerAnomaly(
            f"ray {r} at offset {offsets[r]} ended with status "
            f"{Status(int(res.status[r])).name}"
        )
    graded = live & ~singular

    v = flow.direction
    exit_dirs = res.exit_dirs()
    exit_pts = res.exit_points()
    vdev = np.linalg.norm(exit_dirs - v[None, :], axis=1)
    ldev = _lateral_dev(origins, exit_pts, v)
    max_v = float(vdev[graded].max()) if np.any(graded) else 0.0
    max_l = float(ldev[graded].max()) if np.any(graded) else 0.0

    counts = np.bincount(res.nrefl[graded]) if np.any(graded) else np.zeros(1, int)
    histogram = {int(k): int(c) for k, c in enumerate(counts) if c > 0}

    dv = v[None, :] - exit_dirs[graded]
    resistance_vec = weight * dv.sum(axis=0)
    cross_measure = weight * len(origins)
    singular_frac = float(singular.sum()) / max(1, int(live.sum()))

    band_a = band_m = None
    body = scene.body
    if scene.dim == 2 and isinstance(body, Body2D):
        c0 = float(body.seq.cuts[0])
        band_a = body.empty_band / c0
        inside = np.abs(offsets[:, 0]) <= c0
        zero = inside & (res.nrefl == 0)
        band_m = weight * float(zero.sum()) / (2.0 * c0)

    report = VerificationReport(
        direction=v,
        tau=tau,
        tau_report=tau_report,
        rays_total=len(origins),
        rays_excluded=int(excl.sum()),
        rays_singular=int(singular.sum()),
        histogram=histogram,
        max_velocity_dev=max_v,
        max_lateral_dev=max_l,
        resistance=resistance_vec,
        resistance_per_width=resistance_vec / cross_measure,
        invisible=bool(max_v <= tau and max_l <= tau * scene.scene_diameter),
        zero_resistance=bool(np.linalg.norm(resistance_vec) <= tau * max(1.0, cross_measure)),
        singular_ok=singular_frac <= 1e-3,
        excluded_fraction=float(excl.sum()) / len(origins),
        excluded_bound=_excluded_bound(scene, flow),
        band_analytic=band_a,
        band_measured=band_m,
        scene_diameter=scene.scene_diameter,
        meta={
            "grade_velocity_ok": bool(max_v <= tau_report),
            "grade_lateral_ok": bool(max_l <= tau_report * scene.scene_diameter),
            "weight": weight,
        },
    )
    return report


def resistance(
    scene: Scene,
    flow: FlowSpec,
    backend: Optional[str] = None,
    jobs: int = 1,
) -> np.ndarray:
    """Flow-pressure integral sum_rays weight * (v - v_out); singular and
    excluded rays contribute zero (measure-zero convention)."""
    origins, dirs, _, weight = flow_rays(scene, flow)
    res = trace_batch(scene, origins, dirs, backend, jobs)
    ok = res.status == int(Status.EXITED)
    v = flow.direction
    dv = v[None, :] - res.exit_dirs()[ok]
    return weight * dv.sum(axis=0)


def verify_shading(
    scene: Scene,
    flow: FlowSpec,
    region: Callable[[np.ndarray], np.ndarray],
    step_rel: float = SHADING_STEP_REL,
    backend: Optional[str] = None,
    jobs: int = 1,
    batch: Optional[BatchTrace] = None,
) -> tuple[bool, int]:
    """True iff no traced segment of any non-excluded ray meets the region.

    Segments are densely sampled at ``step_rel * scene_diameter`` (endpoints
    included); the final free segment is extended to the scene boundary.
    """
    origins, dirs, _, _ = flow_rays(scene, flow)
    res = batch if batch is not None else trace_batch(scene, origins, dirs, backend, jobs)
    excl = exclusion_mask(scene, flow, origins)
    step = step_rel * scene.scene_diameter
    tail = 1.1 * scene.scene_diameter
    violations = 0
    chunk_pts: list[np.ndarray] = []
    chunk_size = 0

    def flush() -> int:
        nonlocal chunk_pts, chunk_size
        if not chunk_pts:
            return 0
        pts = np.concatenate(chunk_pts)
        chunk_pts, chunk_size = [], 0
        return int(region(pts).sum())

    for r in range(len(origins)):
        if excl[r]:
            continue
        verts = [origins[r]]
        for k in range(int(res.nevents[r])):
            verts.append(res.points[r, k])
        last_dir = res.exit_dirs()[r] if res.status[r] == int(Status.EXITED) else None
        if last_dir is not None:
            verts.append(verts[-1] + tail * last_dir)
        for a, b in zip(verts[:-1], verts[1:]):
            seg = b - a
            length = float(np.linalg.norm(seg))
            if length == 0.0:
                continue
            n_s = max(2, int(length / step) + 1)
            ts = np.linspace(0.0, 1.0, n_s)[:, None]
            chunk_pts.append(a[None, :] + ts * seg[None, :])
            chunk_size += n_s
            if chunk_size >= 2_000_000:
                violations += flush()
    violations += flush()
    return violations == 0, violations


def time_reversal_deviation(
    scene: Scene,
    res: BatchTrace,
    sample: int,
    seed: int = 0,
    backend: Optional[str] = None,
) -> float:
    """Max mismatch between forward reflection points and the reversed trace."""
    rng = np.random.default_rng(seed)
    rows = np.nonzero((res.status == int(Status.EXITED)) & (res.nrefl > 0))[0]
    if len(rows) == 0:
        return 0.0
    if len(rows) > sample:
        rows = rng.choice(rows, size=sample, replace=False)
    back = 0.6 * scene.scene_diameter
    exit_pts = res.exit_points()
    exit_dirs = res.exit_dirs()
    origins = exit_pts[rows] + back * exit_dirs[rows]
    dirs = -exit_dirs[rows]
    rev = trace_batch(scene, origins, dirs, backend)
    worst = 0.0
    for i, r in enumerate(rows):
        k = int(res.nrefl[r])
        if int(rev.nrefl[i]) != k:
            return float("inf")
        fwd = res.points[r, :k]
        bwd = rev.points[i, :k][::-1]
        worst = max(worst, float(np.abs(fwd - bwd).max()))
    return worst


# -- 3D projection-case analysis -------------------------------------------


@dataclass
class CaseReport:
    n_per_case: int
    seed: int
    cases: dict = field(default_factory=dict)  # name -> dict of counts
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _sample_margined(rng, lo, hi, bad_values, margin, n):
    out = []
    while len(out) < n:
        x = rng.uniform(lo, hi, 4 * (n - len(out)))
        keep = np.ones(len(x), dtype=bool)
        for b in bad_values:
            keep &= np.abs(x - b) >= margin
        out.extend(x[keep].tolist())
    return np.array(out[:n])


def verify_flow_cases(
    body: Body3D,
    scene: Scene,
    n_per_case: int = 400,
    seed: int = 0,
    tau: float = INVISIBILITY_TOL,
    margin: float = 1e-4,
    backend: Optional[str] = None,
    raise_on_violation: bool = False,
) -> CaseReport:
    """Check the four projection cases of the downward z-flow one by one.

    Projections inside the inner square or outside the cube: no reflections.
    Triangle (c1 < x < y < c): four reflections, all on the yz sub-body,
    first two strictly inside the z pyramid.  Rectangle (c1 < x < c,
    0 < y < c1): four reflections on the yz sub-body when the line enters
    below the level's outer profile, none when it passes outside it.
    """
    rng = np.random.default_rng(seed)
    c, c1 = body.c, body.c1
    cuts = list(map(float, body.seq.cuts))
    report = CaseReport(n_per_case, seed)
    yz = SUBBODY_INDEX["yz"]
    pyr = Pyramid(2, 1, c)

    def run_case(name, xy, expected_arr):
        origins = np.concatenate(
            [xy, np.full((len(xy), 1), c + 0.3 * c)], axis=1
        )
        dirs = np.tile([0.0, 0.0, -1.0], (len(xy), 1))
        res = trace_batch(scene, origins, dirs, backend)
        stats = {"rays": len(xy), "refl4": 0, "refl0": 0, "other": 0}
        for r in range(len(xy)):
            expected = int(expected_arr[r])
            n_refl = int(res.nrefl[r])
            status = int(res.status[r])
            if n_refl == 4:
                stats["refl4"] += 1
            elif n_refl == 0:
                stats["refl0"] += 1
            else:
                stats["other"] += 1
            if status != int(Status.EXITED):
                report.violations.append(
                    (name, r, f"status {Status(status).name}", xy[r].tolist())
                )
                continue
            if n_refl != expected:
                report.violations.append(
                    (name, r, f"{n_refl} reflections, expected {expected}", xy[r].tolist())
                )
                continue
            if expected == 4:
                sids = res.surface_ids[r, :4]
                codes = scene.group_code[sids]
                if not np.all(codes == yz):
                    tags = [scene.tags[int(s)] for s in sids]
                    report.violations.append(
                        (name, r, f"reflections off {tags}", xy[r].tolist())
                    )
                    continue
                if not (
                    pyramid_strict(pyr, res.points[r, 0])
                    and pyramid_strict(pyr, res.points[r, 1])
                ):
                    report.violations.append(
                        (name, r, "early reflection outside the z pyramid", xy[r].tolist())
                    )
                    continue
                vdev = float(np.linalg.norm(res.dirs_out[r, 3] - dirs[r]))
                d = res.points[r, 3] - origins[r]
                ldev = float(np.linalg.norm(d - (d @ dirs[r]) * dirs[r]))
                if vdev > tau or ldev > tau * scene.scene_diameter:
                    report.violations.append(
                        (name, r, f"deviations {vdev:g}/{ldev:g}", xy[r].tolist())
                    )
        report.cases[name] = stats

    # Case: projection inside the inner square.
    x = _sample_margined(rng, -c1 + margin, c1 - margin, cuts, margin, n_per_case)
    y = _sample_margined(rng, -c1 + margin, c1 - margin, cuts, margin, n_per_case)
    keep = np.abs(np.abs(x) - np.abs(y)) >= margin
    xy = np.stack([x[keep], y[keep]], axis=1)
    run_case("inner-square", xy, np.zeros(len(xy), int))

    # Case: projection outside the cube.
    x = rng.uniform(c + margin, 2 * c, n_per_case)
    y = rng.uniform(-2 * c, 2 * c, n_per_case)
    run_case("outside", np.stack([x, y], axis=1), np.zeros(n_per_case, int))

    # Case (triangle): c1 < x < y < c.
    lo_y = max(c1, body.complete_aperture)
    y = _sample_margined(rng, lo_y + margin, c - margin, cuts, margin, n_per_case)
    x = np.array([rng.uniform(c1 + margin, yy - margin) for yy in y])
    keep = np.ones(len(x), dtype=bool)
    for b in cuts:
        keep &= np.abs(x - b) >= margin
    xy = np.stack([x[keep], y[keep]], axis=1)
    run_case("triangle", xy, np.full(len(xy), 4))

    # Case (rectangle): c1 < x < c, 0 < y < c1; split by the outer profile.
    y = _sample_margined(
        rng, body.complete_aperture + margin, c1 - margin, cuts, margin, n_per_case
    )
    x = _sample_margined(rng, c1 + margin, c - margin, cuts, margin, n_per_case)
    lev = np.array([body.level_of(abs(v)) for v in y])
    prof = np.array([body.outer_value(l, abs(v)) for l, v in zip(lev, y)])
    keep = np.abs(x - prof) >= margin
    xy = np.stack([x[keep], y[keep]], axis=1)
    expected = np.where(x[keep] < prof[keep], 4, 0)
    run_case("rectangle", xy, expected)

    if raise_on_violation and report.violations:
        name, r, why, proj = report.violations[0]
        raise CaseViolation(f"case {name}, ray {r} at projection {proj}: {why}")
    return report


def pyramid_strict(pyr: Pyramid, pt: np.ndarray) -> bool:
    others = [k for k in range(3) if k != pyr.axis]
    lead = pyr.sign * pt[pyr.axis] if pyr.sign else abs(pt[pyr.axis])
    return bool(lead > max(abs(pt[others[0]]), abs(pt[others[1]])))
