"""Parabolic-mirror bodies, billiard tracing, and invisibility certification."""

from .bodies2d import (
    Body2D,
    RhombusFrame,
    build_rhombus,
    build_rhombus_body,
    build_thin_orthogonal,
    rhombus_frame,
)
from .bodies3d import Body3D, Gallery, Pyramid, build_body3, gallery_contains, pyramid_contains
from .geom import (
    Homothety2,
    Parabola2,
    ParabolicArc2,
    Ray,
    Segment2,
    apply_homothety,
    parabola_from_focus_and_point,
    reflect,
)
from .scene import Scene, flat_mirror_scene, scene_from_body2d, scene_from_body3d
from .sequences import (
    ConstantFraction,
    ExplicitOffsets,
    SequencePair,
    ThinLimit,
    audit_sequences,
    generate_sequences,
)
from .trace import Status, TraceRecord, nearest_hit, trace, trace_batch

__version__ = "0.1.0"

__all__ = [
    "Body2D", "Body3D", "ConstantFraction", "ExplicitOffsets", "Gallery",
    "Homothety2", "Parabola2", "ParabolicArc2", "Pyramid", "Ray", "Scene",
    "Segment2", "SequencePair", "Status", "ThinLimit", "TraceRecord",
    "apply_homothety", "audit_sequences", "build_body3", "build_rhombus",
    "build_rhombus_body", "build_thin_orthogonal", "flat_mirror_scene",
    "gallery_contains", "generate_sequences", "nearest_hit",
    "parabola_from_focus_and_point", "pyramid_contains", "reflect",
    "rhombus_frame", "scene_from_body2d", "scene_from_body3d", "trace",
    "trace_batch",
]
