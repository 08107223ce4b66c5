"""Command-line front end.

Verbs: build, trace, verify, verify-cases, export-svg, export-mesh,
resistance.  Exit codes: 0 success / verdict pass, 2 parse or parameter
error, 3 tracer anomaly, 4 verdict failure.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from .bodies2d import Body2D
from .bodies3d import Body3D
from .errors import (
    CaseViolation,
    InvisFractalError,
    SceneFormatError,
    TracerAnomaly,
    UnsupportedExport,
)
from .geom import Ray
from .meshout import export_mesh
from .sceneio import (
    build_scene_file,
    load_scene,
    serialize_report,
    serialize_scene,
)
from .sequences import ConstantFraction, ExplicitOffsets, ThinLimit
from .svgout import render_svg
from .tolerances import INVISIBILITY_TOL
from .trace import trace
from .verify import (
    DEFAULT_MARGIN,
    default_flow,
    resistance as flow_resistance,
    verify_flow_cases,
    verify_invisibility,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ANOMALY = 3
EXIT_VERDICT = 4


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="invisfractal",
        description="Build parabolic-mirror bodies and certify billiard invisibility.",
    )
    ap.add_argument("--version", action="version", version=f"invisfractal {__version__}")
    ap.add_argument("--seed", type=int, default=0, help="Monte-Carlo seed")
    ap.add_argument("--tolerance", type=float, default=INVISIBILITY_TOL,
                    help="invisibility verdict tolerance")
    ap.add_argument("--depth", type=int, default=None, help="default construction depth")
    ap.add_argument("--jobs", type=int, default=1, help="parallel ray workers")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a scene file from parameters")
    b.add_argument("--kind", required=True, choices=("thin2d", "rhombus2d", "body3d"))
    b.add_argument("--out", required=True)
    b.add_argument("--depth", type=int, default=argparse.SUPPRESS,
                   help="construction depth (overrides the global flag)")
    b.add_argument("--c", type=float, default=1.0)
    b.add_argument("--c1", type=float, default=None)
    b.add_argument("--policy", choices=("thin", "constant", "explicit"), default=None)
    b.add_argument("--gamma", type=float, default=0.5)
    b.add_argument("--offsets", type=str, default=None,
                   help="comma-separated explicit focus offsets")
    b.add_argument("--dir1", type=float, nargs=2, default=(0.0, 1.0))
    b.add_argument("--dir2", type=float, nargs=2, default=(1.0, 0.0))

    t = sub.add_parser("trace", help="trace one ray through a scene")
    t.add_argument("scene")
    t.add_argument("--origin", type=float, nargs="+", required=True)
    t.add_argument("--direction", type=float, nargs="+", required=True)

    v = sub.add_parser("verify", help="certify invisibility for flow directions")
    v.add_argument("scene")
    v.add_argument("--direction", type=float, nargs="+", action="append", default=None)
    v.add_argument("--axes", action="store_true",
                   help="verify every signed invisibility direction of the body")
    v.add_argument("--rays", type=int, default=10000)
    v.add_argument("--mc", action="store_true", help="Monte-Carlo sampling")
    v.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    v.add_argument("--out", default=None, help="report file path")

    vc = sub.add_parser("verify-cases", help="projection case analysis (3D)")
    vc.add_argument("scene")
    vc.add_argument("--rays", type=int, default=400, help="rays per case")

    es = sub.add_parser("export-svg", help="render a 2D scene")
    es.add_argument("scene")
    es.add_argument("--out", required=True)
    es.add_argument("--samples", type=int, default=128)
    es.add_argument("--ray", type=float, nargs=4, action="append", default=[],
                    metavar=("OX", "OY", "DX", "DY"))

    em = sub.add_parser("export-mesh", help="tessellate a 3D scene")
    em.add_argument("scene")
    em.add_argument("--out", required=True)
    em.add_argument("--grid", type=int, nargs=2, default=(32, 8))

    r = sub.add_parser("resistance", help="flow-pressure integral for a direction")
    r.add_argument("scene")
    r.add_argument("--direction", type=float, nargs="+", required=True)
    r.add_argument("--rays", type=int, default=10000)
    return ap


def _policy_from_args(args) -> object:
    name = args.policy
    if name is None:
        name = "thin" if args.kind == "thin2d" else "constant"
    if name == "thin":
        return ThinLimit()
    if name == "constant":
        return ConstantFraction(args.gamma)
    if args.offsets is None:
        raise InvisFractalError("--policy explicit requires --offsets a1,a2,...")
    return ExplicitOffsets([float(v) for v in args.offsets.split(",")])


def _cmd_build(args) -> int:
    depth = args.depth if args.depth is not None else (6 if args.kind == "body3d" else 8)
    params = {"depth": depth}
    if args.kind != "thin2d":
        c1 = args.c1 if args.c1 is not None else (0.5 if args.kind == "body3d" else 0.4)
        params.update(c=args.c, c1=c1, policy=_policy_from_args(args))
    if args.kind == "rhombus2d":
        params.update(dir1=tuple(args.dir1), dir2=tuple(args.dir2))
    sf = build_scene_file(args.kind, **params)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(serialize_scene(sf))
    print(f"wrote {args.out}: kind={sf.kind} surfaces={len(sf.surfaces)}")
    return EXIT_OK


def _scene_direction(scene, v):
    v = np.asarray(v, dtype=np.float64)
    if isinstance(scene.body, Body2D):
        return scene.body.frame.direction_internal(v)
    return v / np.linalg.norm(v)


def _cmd_trace(args) -> int:
    _, scene = load_scene(args.scene)
    ray = Ray(np.array(args.origin, dtype=float), np.array(args.direction, dtype=float))
    rec = trace(scene, ray)
    print(f"status {rec.status.name}")
    for k, refl in enumerate(rec.reflections):
        pt = " ".join(format(v, ".12g") for v in refl.point)
        print(f"reflection {k} at {pt} off {refl.tag}")
    if rec.exit is not None:
        o = " ".join(format(v, ".12g") for v in rec.exit.origin)
        d = " ".join(format(v, ".12g") for v in rec.exit.direction)
        print(f"exit origin {o} direction {d}")
    return EXIT_OK


def _verify_directions(args, scene):
    if args.axes:
        body = scene.body
        if isinstance(body, Body2D):
            dirs = [body.frame.dir1, -body.frame.dir1, body.frame.dir2, -body.frame.dir2]
        elif isinstance(body, Body3D):
            dirs = [e * s for e in np.eye(3) for s in (1.0, -1.0)]
        else:
            raise InvisFractalError("--axes needs a body scene")
        return [np.asarray(d, dtype=float) for d in dirs]
    if not args.direction:
        raise InvisFractalError("verify needs --direction or --axes")
    return [np.asarray(d, dtype=float) for d in args.direction]


def _cmd_verify(args) -> int:
    sf, scene = load_scene(args.scene)
    blocks = []
    all_ok = True
    for v_user in _verify_directions(args, scene):
        v = _scene_direction(scene, v_user)
        flow = default_flow(
            scene, v, args.rays,
            kind="mc" if args.mc else "grid", seed=args.seed, margin=args.margin,
        )
        t0 = time.perf_counter()
        rep = verify_invisibility(scene, flow, tau=args.tolerance, jobs=args.jobs)
        dt = time.perf_counter() - t0
        ok = rep.invisible and rep.singular_ok
        all_ok &= ok
        blocks.append(serialize_report(rep, sf.sha256(), timing_seconds=dt))
        print(
            f"direction {np.array2string(v_user, precision=6)}: "
            f"{'PASS' if ok else 'FAIL'} "
            f"vdev={rep.max_velocity_dev:.3g} ldev={rep.max_lateral_dev:.3g} "
            f"histogram={rep.histogram}"
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("".join(blocks))
    return EXIT_OK if all_ok else EXIT_VERDICT


def _cmd_verify_cases(args) -> int:
    _, scene = load_scene(args.scene)
    body = scene.body
    if not isinstance(body, Body3D):
        raise InvisFractalError("verify-cases needs a body3d scene")
    rep = verify_flow_cases(body, scene, n_per_case=args.rays, seed=args.seed,
                            tau=args.tolerance)
    for name, stats in rep.cases.items():
        print(f"case {name}: {stats}")
    if rep.violations:
        for name, r, why, proj in rep.violations[:10]:
            print(f"VIOLATION case {name} ray {r} at {proj}: {why}")
        return EXIT_VERDICT
    print("all cases consistent")
    return EXIT_OK


def _cmd_export_svg(args) -> int:
    _, scene = load_scene(args.scene)
    rays = [Ray(np.array(r[:2]), np.array(r[2:])) for r in args.ray]
    svg = render_svg(scene, rays, samples_per_arc=args.samples)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_export_mesh(args) -> int:
    _, scene = load_scene(args.scene)
    obj = export_mesh(scene, nu=args.grid[0], nv=args.grid[1])
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(obj)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_resistance(args) -> int:
    _, scene = load_scene(args.scene)
    v = _scene_direction(scene, args.direction)
    flow = default_flow(scene, v, args.rays, seed=args.seed)
    r = flow_resistance(scene, flow, jobs=args.jobs)
    print("resistance " + " ".join(format(x, ".17g") for x in r))
    return EXIT_OK


_COMMANDS = {
    "build": _cmd_build,
    "trace": _cmd_trace,
    "verify": _cmd_verify,
    "verify-cases": _cmd_verify_cases,
    "export-svg": _cmd_export_svg,
    "export-mesh": _cmd_export_mesh,
    "resistance": _cmd_resistance,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (SceneFormatError, FileNotFoundError, UnsupportedExport) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TracerAnomaly as exc:
        print(f"tracer anomaly: {exc}", file=sys.stderr)
        return EXIT_ANOMALY
    except CaseViolation as exc:
        print(f"case violation: {exc}", file=sys.stderr)
        return EXIT_VERDICT
    except InvisFractalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
