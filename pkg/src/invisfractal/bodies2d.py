"""2D mirror bodies: thin orthogonal square variant and the general rhombus.

The general body lives inside a rhombus centered at the origin with two sides
parallel to each invisibility direction.  Internally the first direction is
rotated to the vertical; the slanted sides then have slope ``m``.  Everything
is generated from two canonical families of "atoms" hugging the left half of
the top and bottom sides:

* level-i top atom: solid piece between an outer arc (focus offset a_{i+1}
  along the side) and an inner arc (offset a_i); level 0's inner boundary is a
  straight seam on the falling diagonal.
* level-i bottom atom: mirror story on the bottom side with its own foci.

Four linear isometries replicate the atoms: identity, the central reflection,
and both composed with the reflection across the rising diagonal.  The first
two images form the family invisible along the vertical direction, the last
two the family invisible along the second direction.  In the all-zero offset
(thin) limit each level-i atom with i >= 1 collapses to a single zero
thickness arc, while the level-0 atoms stay solid: joined pairwise across the
diagonal seams they are exactly the four corner blocks of the orthogonal
square picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import GeometryOverlap, InvalidSeed
from .geom import (
    Homothety2,
    Parabola2,
    ParabolicArc2,
    Segment2,
    Surface2,
    unit,
)
from .sequences import Policy, SequencePair, ThinLimit, generate_sequences
from .tolerances import MEMBERSHIP_SURFACE_TOL

TOP, BOTTOM = 0, 1
ATOM_NAMES = ("top", "bottom")
TRANSFORM_NAMES = ("id", "central", "diag", "diagcentral")


@dataclass(frozen=True)
class RhombusFrame:
    """Rhombus with vertical sides and sides of slope ``m``, centered at 0.

    ``rotation`` maps user coordinates to this internal frame (first
    invisibility direction vertical); it is the identity for the canonical
    orthogonal setup.
    """

    c: float
    m: float
    rotation: np.ndarray  # 2x2, user -> internal
    dir1: np.ndarray  # user frame
    dir2: np.ndarray  # user frame

    @property
    def h(self) -> float:
        return self.c * math.sqrt(1.0 + self.m * self.m)

    @property
    def vertex_a(self) -> np.ndarray:
        return np.array([-self.c, self.h - self.c * self.m])

    @property
    def vertex_b(self) -> np.ndarray:
        return np.array([self.c, self.h + self.c * self.m])

    @property
    def vertices(self) -> np.ndarray:
        a, b = self.vertex_a, self.vertex_b
        return np.stack([a, b, -a, -b])

    @property
    def falling_diag_slope(self) -> float:
        """Slope of the diagonal through the top-left vertex."""
        return (self.c * self.m - self.h) / self.c

    @property
    def rising_diag_slope(self) -> float:
        return (self.h + self.c * self.m) / self.c

    def diag_reflection(self) -> np.ndarray:
        u = unit(self.vertex_b)
        return 2.0 * np.outer(u, u) - np.eye(2)

    def transforms(self) -> list[np.ndarray]:
        eye = np.eye(2)
        r = self.diag_reflection()
        return [eye, -eye, r, -r]

    def to_internal(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=np.float64) @ self.rotation.T

    def to_user(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=np.float64) @ self.rotation

    def direction_internal(self, v_user) -> np.ndarray:
        return unit(self.rotation @ np.asarray(v_user, dtype=np.float64))


def rhombus_frame(c: float, dir1=(0.0, 1.0), dir2=(1.0, 0.0)) -> RhombusFrame:
    """Frame for two invisibility directions given in user coordinates."""
    d1 = unit(dir1)
    d2 = unit(dir2)
    cross = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(cross) < 1e-12:
        raise InvalidSeed("invisibility directions must not be parallel")
    # Rotate dir1 onto (0, 1): R = [[d1y, -d1x], [d1x, d1y]].
    rot = np.array([[d1[1], -d1[0]], [d1[0], d1[1]]])
    d2i = rot @ d2
    if d2i[0] < 0.0:
        d2i = -d2i
    m = d2i[1] / d2i[0]
    return RhombusFrame(float(c), float(m), rot, d1, d2)


def _parabola_f(span: float, m: float, side: int) -> float:
    """Focal length of a side-hugging parabola with focus-to-endpoint span.

    ``span = c_i + a`` measured along the abscissa; the top side uses the
    upward-opening branch, the bottom side the downward one.
    """
    root = math.sqrt(1.0 + m * m)
    return 0.5 * span * (root + m if side == TOP else root - m)


@dataclass(frozen=True)
class LevelFuncs:
    """Per-atom per-level profile ``y(x)`` data in the internal frame."""

    focus_x: float
    focus_y: float
    f: float
    side: int  # TOP opens up, BOTTOM opens down

    def eval(self, x):
        dx = np.asarray(x, dtype=np.float64) - self.focus_x
        bulge = dx * dx / (4.0 * self.f) - self.f
        return self.focus_y + bulge if self.side == TOP else self.focus_y - bulge


@dataclass(frozen=True)
class Piece2:
    """One solid or collapsed piece: an atom image under one transform."""

    atom: int  # TOP or BOTTOM
    level: int
    transform: int
    solid: bool
    outer: ParabolicArc2
    inner: Optional[Surface2]  # None when collapsed (thin, level >= 1)
    wall: Optional[Segment2]

    @property
    def tag(self) -> str:
        fam = "A" if self.transform < 2 else "B"
        return f"{fam}:{ATOM_NAMES[self.atom]}:{self.level}:{TRANSFORM_NAMES[self.transform]}"


@dataclass(frozen=True)
class SurfaceEntry:
    surface: Surface2
    tag: str
    kind: str  # "arc", "seam", "wall"
    piece: Piece2


def _transform_arc(mat: np.ndarray, det: float, arc: ParabolicArc2) -> ParabolicArc2:
    pa = arc.parabola
    new = Parabola2(mat @ pa.focus, mat @ pa.axis, pa.f)
    if det < 0.0:
        return ParabolicArc2(new, -arc.xi_hi, -arc.xi_lo)
    return ParabolicArc2(new, arc.xi_lo, arc.xi_hi)


def _transform_segment(mat: np.ndarray, seg: Segment2) -> Segment2:
    return Segment2(mat @ seg.a, mat @ seg.b)


class Body2D:
    """Union of mirror pieces with membership tests and surface tables."""

    def __init__(self, frame: RhombusFrame, seq: SequencePair):
        if seq.cuts[0] != frame.c:
            raise InvalidSeed(
                f"sequence c_0={seq.cuts[0]} does not match frame c={frame.c}"
            )
        self.frame = frame
        self.seq = seq
        self.thin = seq.thin
        self.depth = seq.depth
        self._build_levels()
        self._build_pieces()
        self._check_overlap()

    # -- canonical (internal-frame, transform 0) construction ------------

    def _build_levels(self) -> None:
        fr, seq = self.frame, self.seq
        c, m, h = fr.c, fr.m, fr.h
        n = seq.depth
        self.outer_funcs = []  # [atom][level]
        self.inner_funcs = []  # [atom][level], level 0 entries are None (seam)
        for atom in (TOP, BOTTOM):
            outs, inns = [], []
            for i in range(n):
                ci = float(seq.cuts[i])
                a_out = seq.offset(i + 1)
                outs.append(
                    LevelFuncs(
                        a_out, (h + m * a_out) if atom == TOP else (m * a_out - h),
                        _parabola_f(ci + a_out, m, atom), atom,
                    )
                )
                if i == 0:
                    inns.append(None)
                else:
                    a_in = seq.offset(i)
                    inns.append(
                        LevelFuncs(
                            a_in, (h + m * a_in) if atom == TOP else (m * a_in - h),
                            _parabola_f(ci + a_in, m, atom), atom,
                        )
                    )
            self.outer_funcs.append(outs)
            self.inner_funcs.append(inns)

    def _seam_fn(self, atom: int, x):
        slope = (
            self.frame.falling_diag_slope if atom == TOP else self.frame.rising_diag_slope
        )
        return slope * np.asarray(x, dtype=np.float64)

    def inner_value(self, atom: int, level: int, x):
        if level == 0:
            return self._seam_fn(atom, x)
        return self.inner_funcs[atom][level].eval(x)

    def outer_value(self, atom: int, level: int, x):
        return self.outer_funcs[atom][level].eval(x)

    def _canonical_arc(self, lf: LevelFuncs, level: int) -> ParabolicArc2:
        seq = self.seq
        axis = (0.0, 1.0) if lf.side == TOP else (0.0, -1.0)
        pa = Parabola2(np.array([lf.focus_x, lf.focus_y]), np.array(axis), lf.f)
        x_lo, x_hi = -float(seq.cuts[level]), -float(seq.cuts[level + 1])
        # xi = +-(x - focus_x) depending on the opening sign.
        if lf.side == TOP:
            return ParabolicArc2(pa, x_lo - lf.focus_x, x_hi - lf.focus_x)
        return ParabolicArc2(pa, -(x_hi - lf.focus_x), -(x_lo - lf.focus_x))

    def _canonical_seam(self, atom: int) -> Segment2:
        c1 = float(self.seq.cuts[1])
        outer_vertex = (
            self.frame.vertex_a if atom == TOP else -self.frame.vertex_b
        )
        inner = np.array([-c1, float(self._seam_fn(atom, -c1))])
        return Segment2(outer_vertex, inner)

    def _canonical_wall(self, atom: int, level: int) -> Segment2:
        x = -float(self.seq.cuts[level + 1])
        y_in = float(self.inner_value(atom, level, x))
        y_out = float(self.outer_value(atom, level, x))
        return Segment2(np.array([x, y_in]), np.array([x, y_out]))

    # -- piece and surface tables ----------------------------------------

    def _build_pieces(self) -> None:
        transforms = self.frame.transforms()
        dets = [float(np.linalg.det(t)) for t in transforms]
        pieces: list[Piece2] = []
        surfaces: list[SurfaceEntry] = []
        for t_idx, (mat, det) in enumerate(zip(transforms, dets)):
            for atom in (TOP, BOTTOM):
                for i in range(self.depth):
                    solid = (i == 0) or not self.thin
                    outer = _transform_arc(
                        mat, det, self._canonical_arc(self.outer_funcs[atom][i], i)
                    )
                    inner: Optional[Surface2] = None
                    wall: Optional[Segment2] = None
                    if solid:
                        if i == 0:
                            inner = _transform_segment(mat, self._canonical_seam(atom))
                        else:
                            inner = _transform_arc(
                                mat, det, self._canonical_arc(self.inner_funcs[atom][i], i)
                            )
                        wall = _transform_segment(mat, self._canonical_wall(atom, i))
                    piece = Piece2(atom, i, t_idx, solid, outer, inner, wall)
                    pieces.append(piece)
                    surfaces.append(SurfaceEntry(outer, piece.tag + ":outer", "arc", piece))
                    if solid and i > 0:
                        surfaces.append(
                            SurfaceEntry(inner, piece.tag + ":inner", "arc", piece)
                        )
                    elif solid and i == 0 and t_idx < 2:
                        # The diagonal-family images of the level-0 seams
                        # coincide with these; emit each seam once.
                        surfaces.append(
                            SurfaceEntry(inner, piece.tag + ":seam", "seam", piece)
                        )
                    if solid:
                        surfaces.append(
                            SurfaceEntry(wall, piece.tag + ":wall", "wall", piece)
                        )
        self.pieces = pieces
        self.surface_entries = surfaces

    def _check_overlap(self) -> None:
        solid = [p for p in self.pieces if p.solid]
        samples = []
        for p in solid:
            samples.append(self._piece_interior_samples(p))
        for i, p in enumerate(solid):
            pts = samples[i]
            for j, q in enumerate(solid):
                if i == j:
                    continue
                if np.any(self._piece_contains(q, pts, inset=1e-12 * self.frame.c)):
                    raise GeometryOverlap(
                        f"pieces {p.tag} and {q.tag} have overlapping interiors"
                    )

    def _piece_interior_samples(self, piece: Piece2, nx: int = 9) -> np.ndarray:
        c_i = float(self.seq.cuts[piece.level])
        c_n = float(self.seq.cuts[piece.level + 1])
        xs = np.linspace(-c_i, -c_n, nx + 2)[1:-1]
        lo = self.inner_value(piece.atom, piece.level, xs)
        hi = self.outer_value(piece.atom, piece.level, xs)
        if piece.atom == BOTTOM:
            lo, hi = hi, lo
        pts = []
        for frac in (0.25, 0.5, 0.75):
            ys = lo + frac * (hi - lo)
            pts.append(np.stack([xs, ys], axis=1))
        canonical = np.concatenate(pts)
        return canonical @ self.frame.transforms()[piece.transform]

    def _piece_contains(self, piece: Piece2, pts: np.ndarray, inset: float = 0.0):
        mat = self.frame.transforms()[piece.transform]
        q = np.asarray(pts, dtype=np.float64) @ mat  # involution: inverse = itself
        x, y = q[:, 0], q[:, 1]
        c_i = float(self.seq.cuts[piece.level])
        c_n = float(self.seq.cuts[piece.level + 1])
        ok = (x >= -c_i + inset) & (x <= -c_n - inset)
        lo = self.inner_value(piece.atom, piece.level, x)
        hi = self.outer_value(piece.atom, piece.level, x)
        if piece.atom == BOTTOM:
            lo, hi = hi, lo
        return ok & (y >= lo + inset) & (y <= hi - inset)

    # -- public geometry queries ------------------------------------------

    @property
    def scene_diameter(self) -> float:
        """Longest bounding-box extent (2c for the orthogonal square)."""
        v = self.frame.vertices
        return float((v.max(axis=0) - v.min(axis=0)).max())

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.frame.vertices
        return v.min(axis=0), v.max(axis=0)

    @property
    def empty_band(self) -> float:
        """Half-width of the mirror-free central corridor: the last cut."""
        return float(self.seq.cuts[-1])

    @property
    def complete_aperture(self) -> float:
        """Smallest |offset| with both mirrors of the reflection pair built.

        Rays striking the deepest level's outer arc have no partner arc at
        finite depth; their offsets, between the last two cuts, are the
        truncation cost and are excluded from invisibility statistics.
        """
        return float(self.seq.cuts[-2])

    def ladder_offsets(self, direction: np.ndarray) -> Optional[np.ndarray]:
        """Map ray origins' offsets onto the cut ladder for this flow.

        Returns a matrix M such that |(' M @ origin ')[0]| is the ladder
        abscissa of the ray line, or None when the direction is not one of
        the two invisibility directions (internal frame).
        """
        v = np.asarray(direction, dtype=np.float64)
        d2 = self.frame.direction_internal(self.frame.dir2)
        if abs(abs(float(v[1])) - 1.0) < 1e-9 and abs(float(v[0])) < 1e-9:
            return np.eye(2)
        if abs(abs(float(np.dot(v, d2))) - 1.0) < 1e-9:
            return self.frame.diag_reflection()
        return None

    def level_focus(self, i: int) -> np.ndarray:
        """Internal-frame focus point shared by outer level i-1 and inner level i."""
        a = self.seq.offset(i)
        return np.array([a, self.frame.h + self.frame.m * a])

    def level_homothety(self, i: int) -> Homothety2:
        return Homothety2(self.level_focus(i), self.seq.ratio(i))

    def membership(self, pts, inset: float = 0.0) -> np.ndarray:
        """Closed-set membership; thin collapsed levels count only on-arc."""
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        member = np.zeros(len(pts), dtype=bool)
        for piece in self.pieces:
            if piece.solid:
                member |= self._piece_contains(piece, pts, inset)
        if self.thin and inset == 0.0:
            member |= self._on_thin_arcs(pts)
        return member

    def _on_thin_arcs(self, pts: np.ndarray) -> np.ndarray:
        tol = MEMBERSHIP_SURFACE_TOL * max(1.0, self.frame.c)
        member = np.zeros(len(pts), dtype=bool)
        for entry in self.surface_entries:
            if entry.kind != "arc" or entry.piece.solid:
                continue
            arc = entry.surface
            pa = arc.parabola
            rel = pts - pa.focus
            xi = rel @ pa.xhat
            eta = rel @ pa.axis
            near = (xi >= arc.xi_lo - tol) & (xi <= arc.xi_hi + tol)
            member |= near & (np.abs(eta - (xi * xi / (4 * pa.f) - pa.f)) <= tol)
        return member

    def singular_points(self) -> np.ndarray:
        """Endpoints of every surface: the loci where motion is undefined."""
        pts = []
        for entry in self.surface_entries:
            s = entry.surface
            if isinstance(s, ParabolicArc2):
                pts.extend(s.endpoints)
            else:
                pts.extend((s.a, s.b))
        return np.stack(pts)

    # -- named shaded regions (open interiors, inset applied) -------------

    def corner_block_region(self, inset: float) -> Callable[[np.ndarray], np.ndarray]:
        blocks = [p for p in self.pieces if p.solid and p.level == 0]

        def contains(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
            out = np.zeros(len(pts), dtype=bool)
            for piece in blocks:
                out |= self._piece_contains(piece, pts, inset)
            return out

        return contains

    def trapezoid_region(self, inset: float) -> Callable[[np.ndarray], np.ndarray]:
        """Slivers between the diagonals beside the vertical sides."""
        fr = self.frame
        c, c1 = fr.c, float(self.seq.cuts[1])
        k_fall, k_rise = fr.falling_diag_slope, fr.rising_diag_slope

        def contains(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
            x, y = pts[:, 0], pts[:, 1]
            left = (
                (x >= -c + inset)
                & (x <= -c1 - inset)
                & (y >= k_rise * x + inset)
                & (y <= k_fall * x - inset)
            )
            right = (
                (x >= c1 + inset)
                & (x <= c - inset)
                & (y >= k_fall * x + inset)
                & (y <= k_rise * x - inset)
            )
            return left | right

        return contains

    def side_shadow_region(self, inset: float) -> Callable[[np.ndarray], np.ndarray]:
        """Region beside the outermost level-0 arcs, shaded from vertical flow.

        Defined for the orthogonal frame, where the level-0 outer profile is
        an even function of the abscissa.
        """
        if self.frame.m != 0.0:
            raise InvalidSeed("side shadow region is defined for orthogonal frames")
        c, c1 = self.frame.c, float(self.seq.cuts[1])
        outer0 = self.outer_funcs[TOP][0]

        def contains(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
            ax = np.abs(pts[:, 0])
            cap = outer0.eval(-ax)
            return (
                (ax >= c1 + inset)
                & (ax <= c - inset)
                & (np.abs(pts[:, 1]) <= cap - inset)
            )

        return contains


def build_rhombus_body(frame: RhombusFrame, seq: SequencePair) -> Body2D:
    return Body2D(frame, seq)


def build_thin_orthogonal(n: int) -> Body2D:
    """Unit-square thin body: arc levels at dyadic cuts, foci mid-side.

    Level k of the vertical family is the graph
    ``y = 2**(k-2) x**2 + 1 - 2**-k`` over ``2**-k <= |x| <= 2**-k+1``; the
    horizontal family is its image across the rising diagonal.  The dyadic
    ladder makes the general builder reproduce these coefficients exactly.
    """
    seq = generate_sequences(1.0, 0.5, ThinLimit(), n)
    return Body2D(rhombus_frame(1.0), seq)


def build_rhombus(
    c: float,
    c1: float,
    policy: Policy,
    n: int,
    dir1=(0.0, 1.0),
    dir2=(1.0, 0.0),
) -> Body2D:
    frame = rhombus_frame(c, dir1, dir2)
    return Body2D(frame, generate_sequences(c, c1, policy, n))
