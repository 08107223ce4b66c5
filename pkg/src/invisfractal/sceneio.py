"""Line-oriented scene and report files.

Both formats are versioned, human-diffable text: one ``key value...`` line
per field, reals printed with 17 significant digits (lossless for doubles),
terminated by ``end``.  Scene files carry the generating parameters plus the
explicit surface table; standard kinds are rebuilt from the parameters and
cross-checked against the stored table, ``custom`` scenes are realized from
the table alone.  Reports are byte-deterministic except for the
``timing_seconds`` line, which :func:`canonical_report` strips.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .bodies2d import build_rhombus, build_thin_orthogonal
from .bodies3d import build_body3
from .errors import SceneFormatError
from .geom import ParabolicArc2, Segment2
from .scene import Scene, scene2_from_surfaces, scene_from_body2d, scene_from_body3d
from .sequences import ConstantFraction, ExplicitOffsets, ThinLimit, generate_sequences
from .verify import VerificationReport

SCENE_MAGIC = "invisfractal-scene"
REPORT_MAGIC = "invisfractal-report"
SCENE_VERSION = 1
REPORT_VERSION = 1

KINDS = ("thin2d", "rhombus2d", "body3d", "custom")


def fnum(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class SceneFile:
    kind: str
    params: dict
    surfaces: list  # list of token tuples, one per surface line
    version: int = SCENE_VERSION

    def sha256(self) -> str:
        return hashlib.sha256(serialize_scene(self).encode()).hexdigest()


def _policy_tokens(policy) -> list[str]:
    if isinstance(policy, ThinLimit):
        return ["thin"]
    if isinstance(policy, ConstantFraction):
        return ["constant", fnum(policy.gamma)]
    return ["explicit"] + [fnum(v) for v in policy.values]


def _parse_policy(tokens: list[str]):
    if not tokens:
        raise SceneFormatError("policy line is empty")
    name = tokens[0]
    if name == "thin":
        return ThinLimit()
    if name == "constant":
        if len(tokens) != 2:
            raise SceneFormatError("policy constant needs exactly one fraction")
        return ConstantFraction(float(tokens[1]))
    if name == "explicit":
        if len(tokens) < 2:
            raise SceneFormatError("policy explicit needs offset values")
        return ExplicitOffsets([float(t) for t in tokens[1:]])
    raise SceneFormatError(f"unknown policy {name!r}")


def _surface_lines_2d(scene: Scene) -> list[tuple]:
    rows = []
    for i, obj in enumerate(scene.surfaces):
        tag = scene.tags[i]
        wall = int(scene.wall[i])
        if isinstance(obj, ParabolicArc2):
            pa = obj.parabola
            rows.append(
                ("arc", tag, wall, pa.focus[0], pa.focus[1], pa.axis[0], pa.axis[1],
                 pa.f, obj.xi_lo, obj.xi_hi)
            )
        else:
            rows.append(("segment", tag, wall, obj.a[0], obj.a[1], obj.b[0], obj.b[1]))
    return rows


def _surface_lines_3d(scene: Scene) -> list[tuple]:
    rows = []
    for i, p in enumerate(scene.surfaces):
        rows.append(
            ("patch", scene.tags[i], int(scene.wall[i]),
             p.axis_u, p.axis_w, p.axis_t, int(p.sign_u), int(p.sign_w), int(p.sign_t),
             p.A, p.B, p.C, p.s_lo, p.s_hi, p.t_lo)
        )
    return rows


def scenefile_from_scene(scene: Scene, kind: str, params: dict) -> SceneFile:
    rows = _surface_lines_2d(scene) if scene.dim == 2 else _surface_lines_3d(scene)
    return SceneFile(kind, params, rows)


def build_scene_file(kind: str, **params) -> SceneFile:
    """Build a body from parameters and package it as a scene file."""
    scene, norm = realize_params(kind, params)
    return scenefile_from_scene(scene, kind, norm)


def realize_params(kind: str, params: dict) -> tuple[Scene, dict]:
    if kind == "thin2d":
        n = int(params.get("depth", 8))
        body = build_thin_orthogonal(n)
        return scene_from_body2d(body), {"depth": n}
    if kind == "rhombus2d":
        n = int(params.get("depth", 8))
        c = float(params.get("c", 1.0))
        c1 = float(params.get("c1", 0.4))
        policy = params.get("policy", ConstantFraction(0.5))
        dir1 = tuple(params.get("dir1", (0.0, 1.0)))
        dir2 = tuple(params.get("dir2", (1.0, 0.0)))
        body = build_rhombus(c, c1, policy, n, dir1, dir2)
        return scene_from_body2d(body), {
            "depth": n, "c": c, "c1": c1, "policy": policy,
            "dir1": dir1, "dir2": dir2,
        }
    if kind == "body3d":
        n = int(params.get("depth", 6))
        c = float(params.get("c", 1.0))
        c1 = float(params.get("c1", 0.5))
        policy = params.get("policy", ConstantFraction(0.5))
        seq = generate_sequences(c, c1, policy, n)
        body = build_body3(c, c1, seq, n)
        return scene_from_body3d(body), {
            "depth": n, "c": c, "c1": c1, "policy": policy,
        }
    if kind == "custom":
        surfaces = params.get("surfaces", [])
        return _realize_custom(surfaces), {"surfaces": surfaces}
    raise SceneFormatError(f"unknown scene kind {kind!r}")


def _realize_custom(rows: list) -> Scene:
    entries = []
    pts = []
    for row in rows:
        tag, wall = row[1], bool(row[2])
        if row[0] == "arc":
            fx, fy, ax, ay, f, lo, hi = map(float, row[3:10])
            from .geom import Parabola2

            arc = ParabolicArc2(Parabola2(np.array([fx, fy]), np.array([ax, ay]), f), lo, hi)
            entries.append((arc, tag, wall))
            pts.extend(arc.endpoints)
            pts.append(arc.parabola.point_at(0.5 * (lo + hi)))
        elif row[0] == "segment":
            a = np.array([float(row[3]), float(row[4])])
            b = np.array([float(row[5]), float(row[6])])
            entries.append((Segment2(a, b), tag, wall))
            pts.extend((a, b))
        else:
            raise SceneFormatError(f"unknown surface kind {row[0]!r} in custom scene")
    if pts:
        pts = np.stack(pts)
        lo, hi = pts.min(axis=0) - 0.05, pts.max(axis=0) + 0.05
        diam = float((hi - lo).max())
    else:
        lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
        diam = 2.0
    return scene2_from_surfaces(entries, lo, hi, diam)


def serialize_scene(sf: SceneFile) -> str:
    lines = [f"{SCENE_MAGIC} {sf.version}", f"kind {sf.kind}"]
    p = sf.params
    if sf.kind in ("thin2d", "rhombus2d", "body3d"):
        lines.append(f"depth {int(p['depth'])}")
    if sf.kind in ("rhombus2d", "body3d"):
        lines.append(f"c {fnum(p['c'])}")
        lines.append(f"c1 {fnum(p['c1'])}")
        lines.append("policy " + " ".join(_policy_tokens(p["policy"])))
    if sf.kind == "rhombus2d":
        lines.append("dir1 " + " ".join(fnum(v) for v in p["dir1"]))
        lines.append("dir2 " + " ".join(fnum(v) for v in p["dir2"]))
    lines.append(f"surfaces {len(sf.surfaces)}")
    for row in sf.surfaces:
        toks = [row[0], row[1], str(int(row[2]))]
        for v in row[3:]:
            toks.append(str(int(v)) if isinstance(v, (int, np.integer)) else fnum(v))
        lines.append(" ".join(toks))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_scene(text: str) -> SceneFile:
    lines = [ln.rstrip("\n") for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SceneFormatError("empty scene file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != SCENE_MAGIC:
        raise SceneFormatError(f"line 1: expected '{SCENE_MAGIC} <version>'")
    version = int(head[1])
    if version != SCENE_VERSION:
        raise SceneFormatError(f"unsupported scene version {version}")
    fields: dict = {}
    surfaces: list = []
    i = 1
    n_expected: Optional[int] = None
    while i < len(lines):
        toks = lines[i].split()
        key = toks[0]
        if key == "end":
            break
        if key == "surfaces":
            n_expected = int(toks[1])
            for j in range(i + 1, i + 1 + n_expected):
                if j >= len(lines):
                    raise SceneFormatError("surface table truncated before 'end'")
                row = lines[j].split()
                if row[0] == "arc":
                    surfaces.append(
                        ("arc", row[1], int(row[2]), *[float(v) for v in row[3:10]])
                    )
                elif row[0] == "segment":
                    surfaces.append(
                        ("segment", row[1], int(row[2]), *[float(v) for v in row[3:7]])
                    )
                elif row[0] == "patch":
                    surfaces.append(
                        ("patch", row[1], int(row[2]),
                         *[int(v) for v in row[3:9]], *[float(v) for v in row[9:15]])
                    )
                else:
                    raise SceneFormatError(f"line {j + 1}: unknown surface {row[0]!r}")
            i = i + 1 + n_expected
            continue
        if key == "kind":
            if toks[1] not in KINDS:
                raise SceneFormatError(f"line {i + 1}: unknown kind {toks[1]!r}")
            fields["kind"] = toks[1]
        elif key == "depth":
            fields["depth"] = int(toks[1])
        elif key in ("c", "c1"):
            fields[key] = float(toks[1])
        elif key == "policy":
            fields["policy"] = _parse_policy(toks[1:])
        elif key in ("dir1", "dir2"):
            fields[key] = (float(toks[1]), float(toks[2]))
        else:
            raise SceneFormatError(f"line {i + 1}: unknown field {key!r}")
        i += 1
    else:
        raise SceneFormatError("missing 'end' line")
    if "kind" not in fields:
        raise SceneFormatError("missing field 'kind'")
    kind = fields.pop("kind")
    if kind != "custom" and "depth" not in fields:
        raise SceneFormatError("missing field 'depth'")
    if kind in ("rhombus2d", "body3d"):
        for k in ("c", "c1", "policy"):
            if k not in fields:
                raise SceneFormatError(f"missing field {k!r}")
    if kind == "custom":
        fields["surfaces"] = surfaces
    return SceneFile(kind, fields, surfaces, version)


def realize_scene(sf: SceneFile) -> Scene:
    scene, _ = realize_params(sf.kind, dict(sf.params))
    if sf.kind != "custom" and len(sf.surfaces) != scene.n_surfaces:
        raise SceneFormatError(
            f"surface table has {len(sf.surfaces)} rows but the parameters "
            f"rebuild {scene.n_surfaces}"
        )
    return scene


def load_scene(path: str) -> tuple[SceneFile, Scene]:
    with open(path, "r", encoding="utf-8") as fh:
        sf = parse_scene(fh.read())
    return sf, realize_scene(sf)


# -- report files ------------------------------------------------------------


def serialize_report(
    rep: VerificationReport,
    scene_sha: str = "-",
    timing_seconds: Optional[float] = None,
) -> str:
    lines = [
        f"{REPORT_MAGIC} {REPORT_VERSION}",
        f"tool invisfractal {__version__}",
        f"scene_sha256 {scene_sha}",
        "direction " + " ".join(fnum(v) for v in rep.direction),
        f"tau {fnum(rep.tau)}",
        f"tau_report {fnum(rep.tau_report)}",
        f"scene_diameter {fnum(rep.scene_diameter)}",
        f"rays_total {rep.rays_total}",
        f"rays_excluded {rep.rays_excluded}",
        f"rays_singular {rep.rays_singular}",
    ]
    for k in sorted(rep.histogram):
        lines.append(f"hist {k} {rep.histogram[k]}")
    lines += [
        f"max_velocity_dev {fnum(rep.max_velocity_dev)}",
        f"max_lateral_dev {fnum(rep.max_lateral_dev)}",
        "resistance " + " ".join(fnum(v) for v in rep.resistance),
        "resistance_per_width " + " ".join(fnum(v) for v in rep.resistance_per_width),
        f"excluded_fraction {fnum(rep.excluded_fraction)}",
        f"excluded_bound {fnum(rep.excluded_bound)}",
        "band_analytic " + ("-" if rep.band_analytic is None else fnum(rep.band_analytic)),
        "band_measured " + ("-" if rep.band_measured is None else fnum(rep.band_measured)),
        f"invisible {'true' if rep.invisible else 'false'}",
        f"zero_resistance {'true' if rep.zero_resistance else 'false'}",
        f"singular_ok {'true' if rep.singular_ok else 'false'}",
    ]
    if timing_seconds is not None:
        lines.append(f"timing_seconds {fnum(timing_seconds)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def canonical_report(text: str) -> str:
    """Report text with the volatile timing line removed."""
    return "".join(
        ln for ln in text.splitlines(keepends=True)
        if not ln.startswith("timing_seconds ")
    )


def parse_report(text: str) -> dict:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != REPORT_MAGIC:
        raise SceneFormatError("not a report file")
    if int(head[1]) != REPORT_VERSION:
        raise SceneFormatError(f"unsupported report version {head[1]}")
    out: dict = {"histogram": {}}
    for ln in lines[1:]:
        toks = ln.split()
        if toks[0] == "end":
            break
        if toks[0] == "hist":
            out["histogram"][int(toks[1])] = int(toks[2])
        elif toks[0] in ("direction", "resistance", "resistance_per_width"):
            out[toks[0]] = [float(v) for v in toks[1:]]
        elif toks[0] in ("invisible", "zero_resistance", "singular_ok"):
            out[toks[0]] = toks[1] == "true"
        elif toks[0] in ("band_analytic", "band_measured"):
            out[toks[0]] = None if toks[1] == "-" else float(toks[1])
        elif toks[0] in ("rays_total", "rays_excluded", "rays_singular"):
            out[toks[0]] = int(toks[1])
        elif toks[0] in ("tool", "scene_sha256"):
            out[toks[0]] = " ".join(toks[1:])
        else:
            out[toks[0]] = float(toks[1])
    else:
        raise SceneFormatError("missing 'end' line")
    return out
