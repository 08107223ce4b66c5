"""Deterministic billiard tracing over a Scene.

Two interchangeable backends do the work: numba-jitted per-ray kernels
(default when numba imports) and a pure-numpy lockstep tracer.  Set the
environment variable ``INVISFRACTAL_BACKEND`` to ``numpy`` or ``numba`` to
force one; ``benchmarks/bench_tracer.py`` compares them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

import numpy as np

from . import _kernels_numpy as _knp
from .errors import InvisFractalError
from .geom import Hit, Ray, scaled_eps
from .scene import Scene
from .tolerances import HIT_TIE_ABS

BACKEND_ENV = "INVISFRACTAL_BACKEND"

try:
    from . import _kernels_numba as _knb

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _knb = None
    _HAVE_NUMBA = False


class Status(IntEnum):
    EXITED = 0
    SINGULAR_HIT = 1
    BOUNCE_CAP = 2
    WALL_ANOMALY = 3


def available_backends() -> list[str]:
    return ["numba", "numpy"] if _HAVE_NUMBA else ["numpy"]


def resolve_backend(name: Optional[str] = None) -> str:
    name = name or os.environ.get(BACKEND_ENV, "").strip().lower() or None
    if name is None:
        return "numba" if _HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise InvisFractalError(f"unknown tracer backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise InvisFractalError("numba backend requested but numba is not importable")
    return name


@dataclass
class BatchTrace:
    """Struct-of-arrays result for a ray batch.

    Reflections of ray r live in ``points[r, :nrefl[r]]`` with the outgoing
    directions in ``dirs_out`` and surface rows in ``surface_ids``; a
    terminal singular/wall hit occupies slot ``nrefl[r]`` (then
    ``nevents = nrefl + 1``).
    """

    origins: np.ndarray
    entry_dirs: np.ndarray
    status: np.ndarray
    nrefl: np.ndarray
    nevents: np.ndarray
    points: np.ndarray
    dirs_out: np.ndarray
    surface_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.status)

    @property
    def exited(self) -> np.ndarray:
        return self.status == int(Status.EXITED)

    def exit_dirs(self) -> np.ndarray:
        """Final direction per ray (entry direction when nothing was hit)."""
        out = self.entry_dirs.copy()
        k = self.nrefl
        has = k > 0
        rows = np.nonzero(has)[0]
        out[rows] = self.dirs_out[rows, k[rows] - 1]
        return out

    def exit_points(self) -> np.ndarray:
        """A point on the final free-flight line (entry origin when untouched)."""
        out = self.origins.copy()
        rows = np.nonzero(self.nrefl > 0)[0]
        out[rows] = self.points[rows, self.nrefl[rows] - 1]
        return out


def trace_batch(
    scene: Scene,
    origins: np.ndarray,
    dirs: np.ndarray,
    backend: Optional[str] = None,
    jobs: int = 1,
) -> BatchTrace:
    origins = np.ascontiguousarray(np.atleast_2d(origins), dtype=np.float64)
    dirs = np.ascontiguousarray(np.atleast_2d(dirs), dtype=np.float64)
    if origins.shape != dirs.shape or origins.shape[1] != scene.dim:
        raise ValueError("origins/dirs must be (n, dim) matching the scene")
    m = origins.shape[0]
    which = resolve_backend(backend)
    t_eps, rim_eps, graze = scaled_eps(scene.scene_diameter)
    tie = HIT_TIE_ABS
    k_slots = scene.max_bounces + 1

    status = np.full(m, -1, dtype=np.int8)
    nrefl = np.zeros(m, dtype=np.int32)
    nevents = np.zeros(m, dtype=np.int32)
    pts = np.zeros((m, k_slots, scene.dim))
    douts = np.zeros((m, k_slots, scene.dim))
    sids = np.full((m, k_slots), -1, dtype=np.int32)

    def run(lo: int, hi: int) -> None:
        o, d = origins[lo:hi], dirs[lo:hi]
        if which == "numpy" or scene.n_surfaces == 0:
            res = _knp.trace_batch_numpy(o, d, scene, t_eps, rim_eps, graze, tie)
            (status[lo:hi], nrefl[lo:hi], nevents[lo:hi],
             pts[lo:hi], douts[lo:hi], sids[lo:hi]) = res
            return
        tab = scene.tables
        if scene.dim == 2:
            _knb.trace2d_numba(
                o, d,
                tab["ex"], tab["ey"], tab["hx"], tab["hy"],
                tab["kap"], tab["lam"], tab["mu"], tab["xlo"], tab["xhi"],
                scene.wall,
                t_eps, rim_eps, graze, tie, scene.max_bounces,
                status[lo:hi], nrefl[lo:hi], nevents[lo:hi],
                pts[lo:hi], douts[lo:hi], sids[lo:hi],
            )
        else:
            _knb.trace3d_numba(
                o, d,
                tab["iu"], tab["iw"], tab["it"],
                tab["su"], tab["sw"], tab["st"],
                tab["A"], tab["B"], tab["C"],
                tab["slo"], tab["shi"], tab["tlo"],
                scene.wall,
                t_eps, rim_eps, graze, tie, scene.max_bounces,
                status[lo:hi], nrefl[lo:hi], nevents[lo:hi],
                pts[lo:hi], douts[lo:hi], sids[lo:hi],
            )

    jobs = max(1, int(jobs))
    if jobs == 1 or m < 2 * jobs:
        run(0, m)
    else:
        bounds = np.linspace(0, m, jobs + 1).astype(int)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(run, int(bounds[i]), int(bounds[i + 1]))
                for i in range(jobs)
                if bounds[i] < bounds[i + 1]
            ]
            for f in futures:
                f.result()

    return BatchTrace(origins, dirs, status, nrefl, nevents, pts, douts, sids)


@dataclass(frozen=True)
class Reflection:
    point: np.ndarray
    incoming: np.ndarray
    outgoing: np.ndarray
    surface_id: int
    tag: str


@dataclass(frozen=True)
class TraceRecord:
    entry: Ray
    reflections: tuple
    exit: Optional[Ray]
    status: Status
    terminal_hit: Optional[Hit] = None

    @property
    def n_reflections(self) -> int:
        return len(self.reflections)


def trace(scene: Scene, ray: Ray, backend: Optional[str] = None) -> TraceRecord:
    """Trace one ray and assemble a full record."""
    res = trace_batch(scene, ray.origin[None, :], ray.direction[None, :], backend)
    return record_from_batch(scene, res, 0)


def record_from_batch(scene: Scene, res: BatchTrace, r: int) -> TraceRecord:
    entry = Ray(res.origins[r], res.entry_dirs[r])
    refl = []
    incoming = res.entry_dirs[r]
    for k in range(int(res.nrefl[r])):
        sid = int(res.surface_ids[r, k])
        refl.append(
            Reflection(
                res.points[r, k].copy(), incoming.copy(),
                res.dirs_out[r, k].copy(), sid, scene.tags[sid],
            )
        )
        incoming = res.dirs_out[r, k]
    st = Status(int(res.status[r]))
    exit_ray = None
    if st == Status.EXITED:
        origin = res.points[r, res.nrefl[r] - 1] if res.nrefl[r] > 0 else res.origins[r]
        exit_ray = Ray(origin, incoming)
    terminal = None
    if st in (Status.SINGULAR_HIT, Status.WALL_ANOMALY):
        k = int(res.nrefl[r])
        sid = int(res.surface_ids[r, k])
        terminal = Hit(
            float(np.linalg.norm(res.points[r, k] - res.origins[r])),
            res.points[r, k].copy(), np.zeros(scene.dim), sid,
            st == Status.SINGULAR_HIT,
        )
    return TraceRecord(entry, tuple(refl), exit_ray, st, terminal)


def nearest_hit(scene: Scene, ray: Ray, t_eps: Optional[float] = None) -> Optional[Hit]:
    """Scalar nearest-hit over the scene via the reference geometry routines."""
    from .geom import intersect_ray_patch, intersect_ray_surface

    te, rim_eps, graze = scaled_eps(scene.scene_diameter)
    if t_eps is not None:
        te = t_eps
    best: Optional[Hit] = None
    for sid, obj in enumerate(scene.surfaces):
        if scene.dim == 2:
            h = intersect_ray_surface(ray, obj, te, rim_eps, graze, sid)
        else:
            h = intersect_ray_patch(ray, obj, te, rim_eps, graze)
        if h is None:
            continue
        if best is None or h.t < best.t - HIT_TIE_ABS:
            best = h
    return best
