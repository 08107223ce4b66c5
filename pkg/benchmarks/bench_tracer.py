#!/usr/bin/env python3
"""Benchmark the two tracer backends on representative scenes.

Run:  python3 benchmarks/bench_tracer.py [--rays N]

Builds the depth-8 thin 2D body and the depth-6 3D body, traces a vertical
flow with the numba kernels and the pure-numpy lockstep tracer, and prints
rays/second for each (numba timings exclude the one-off JIT compile, which
is warmed on a tiny batch first).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from invisfractal import (
    ConstantFraction,
    build_body3,
    build_thin_orthogonal,
    generate_sequences,
    trace_batch,
)
from invisfractal.scene import scene_from_body2d, scene_from_body3d
from invisfractal.trace import available_backends


def flow_arrays(scene, n):
    dim = scene.dim
    lo, hi = scene.bbox_lo, scene.bbox_hi
    rng = np.random.default_rng(0)
    origins = np.empty((n, dim))
    for k in range(dim - 1):
        origins[:, k] = rng.uniform(lo[k] * 1.05, hi[k] * 1.05, n)
    origins[:, dim - 1] = hi[dim - 1] + 0.5
    dirs = np.zeros((n, dim))
    dirs[:, dim - 1] = -1.0
    return origins, dirs


def bench(scene, name, n, repeats=3):
    origins, dirs = flow_arrays(scene, n)
    rows = []
    for backend in available_backends():
        trace_batch(scene, origins[:64], dirs[:64], backend=backend)  # warm/JIT
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            res = trace_batch(scene, origins, dirs, backend=backend)
            best = min(best, time.perf_counter() - t0)
        rows.append((backend, best, n / best, int(res.nrefl.sum())))
    print(f"\n{name}: {n} rays, {scene.n_surfaces} surfaces")
    for backend, secs, rps, bounces in rows:
        print(f"  {backend:<6} {secs * 1e3:9.1f} ms   {rps / 1e3:9.1f} krays/s   "
              f"{bounces} reflections")
    if len(rows) == 2:
        print(f"  speedup numba/numpy: {rows[1][1] / rows[0][1]:.1f}x")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rays", type=int, default=20000)
    args = ap.parse_args()

    body2 = build_thin_orthogonal(8)
    bench(scene_from_body2d(body2), "thin 2D body, depth 8", args.rays)

    seq = generate_sequences(1.0, 0.5, ConstantFraction(0.5), 6)
    body3 = build_body3(1.0, 0.5, seq, 6)
    bench(scene_from_body3d(body3), "3D body, depth 6", args.rays)


if __name__ == "__main__":
    main()
