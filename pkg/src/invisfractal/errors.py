"""Exception types shared across the package."""


class InvisFractalError(Exception):
    """Base class for all package errors."""


class DegenerateParabola(InvisFractalError):
    """The requested parabola has zero focal length."""


class InvalidSeed(InvisFractalError):
    """Seed abscissa outside the admissible open interval."""


class ConstraintViolation(InvisFractalError):
    """A focus-offset sequence violates its admissibility inequalities."""


class GeometryOverlap(InvisFractalError):
    """Two solid pieces have intersecting interiors (invalid sequences)."""


class SceneFormatError(InvisFractalError):
    """A scene or report file failed to parse or validate."""


class UnsupportedExport(InvisFractalError):
    """The requested exporter does not apply to this scene dimension."""


class TracerAnomaly(InvisFractalError):
    """A traced ray hit a wall primitive or exceeded the bounce cap."""


class CaseViolation(InvisFractalError):
    """A case-analysis ray contradicted its predicted reflection pattern."""
