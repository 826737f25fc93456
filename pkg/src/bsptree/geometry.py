"""Convex polygon algebra: perimeters, projections, oblique splits,
point location and convex intersection.

All values are immutable after construction and every operation is pure,
so they can be shared freely between workers.

Conventions:
  - vertices are counter-clockwise with positive signed area;
  - a cut direction ``theta`` in (0, pi] has unit normal
    (cos(theta), sin(theta)); the cut line is the set of points whose
    dot product with the normal equals ``offset``.  This is equivalent
    to the (1; tan theta)-normal form but has no singularity at
    theta = pi/2;
  - polygons are closed: boundary points count as inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import CutMisses, DegenerateCut, GeometryError

# predicate tolerance and degenerate-child area threshold (unit scale)
EPS_GEOM = 1e-9
EPS_AREA = 1e-12


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError("point coordinates must be finite")

    def as_array(self):
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class CutLine:
    """Directed oblique cut: unit normal (cos theta, sin theta), scalar
    position ``offset`` along the normal."""

    theta: float
    offset: float

    def __post_init__(self):
        if not (0.0 < self.theta <= math.pi):
            raise GeometryError(f"theta must be in (0, pi], got {self.theta}")
        if not math.isfinite(self.offset):
            raise GeometryError("offset must be finite")

    @property
    def normal(self):
        return math.cos(self.theta), math.sin(self.theta)

    def signed_distance(self, pts):
        """Projection of points (n,2) minus offset; negative = below side."""
        ct, st = self.normal
        pts = np.asarray(pts, dtype=float)
        return pts[..., 0] * ct + pts[..., 1] * st - self.offset

    def to_json(self):
        return {"theta": self.theta, "offset": self.offset}

    @classmethod
    def from_json(cls, obj):
        return cls(theta=float(obj["theta"]), offset=float(obj["offset"]))


@dataclass(frozen=True)
class ProjectionSegment:
    lo: float
    hi: float

    @property
    def length(self):
        return self.hi - self.lo


class ConvexPolygon:
    """Immutable 2D convex polygon (CCW vertices, positive area).

    Construction simplifies away duplicate and collinear vertices and
    validates convexity; ``_from_trusted`` skips validation for outputs
    of operations that preserve the invariants (split, clip).
    """

    __slots__ = ("_verts",)

    def __init__(self, vertices):
        verts = np.asarray(
            [(p.x, p.y) if isinstance(p, Point2) else tuple(p) for p in vertices],
            dtype=float,
        )
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise GeometryError("vertices must be a sequence of 2D points")
        if not np.isfinite(verts).all():
            raise GeometryError("vertices must be finite")
        verts = _simplify(verts)
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 non-collinear vertices")
        if _kernels.area(verts) <= 0.0:
            raise GeometryError("vertices must be counter-clockwise (positive area)")
        if not _is_convex(verts):
            raise GeometryError("vertices do not form a convex polygon")
        self._verts = verts
        self._verts.setflags(write=False)

    @classmethod
    def _from_trusted(cls, verts):
        poly = cls.__new__(cls)
        poly._verts = np.ascontiguousarray(verts, dtype=float)
        poly._verts.setflags(write=False)
        return poly

    @property
    def vertices(self):
        return self._verts

    def __len__(self):
        return len(self._verts)

    def __repr__(self):
        pts = ", ".join(f"({x:g},{y:g})" for x, y in self._verts)
        return f"ConvexPolygon([{pts}])"

    def __eq__(self, other):
        if not isinstance(other, ConvexPolygon):
            return NotImplemented
        return len(self) == len(other) and np.allclose(
            _canonical(self._verts), _canonical(other._verts), atol=EPS_GEOM
        )

    def __hash__(self):
        return hash(np.round(_canonical(self._verts), 9).tobytes())

    def to_json(self):
        return {"vertices": [[x, y] for x, y in self._verts]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["vertices"])

    @classmethod
    def unit_square(cls):
        return cls([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])

    @classmethod
    def rectangle(cls, x0, y0, x1, y1):
        return cls([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def _simplify(verts):
    """Merge duplicate and near-collinear consecutive vertices."""
    n = len(verts)
    if n < 3:
        return verts
    keep = []
    for i in range(n):
        p = verts[i]
        q = verts[(i + 1) % n]
        if np.hypot(*(q - p)) > 1e-12:
            keep.append(p)
    verts = np.asarray(keep)
    n = len(verts)
    if n < 3:
        return verts
    prev = np.roll(verts, 1, axis=0)
    nxt = np.roll(verts, -1, axis=0)
    cross = (verts[:, 0] - prev[:, 0]) * (nxt[:, 1] - prev[:, 1]) - (
        verts[:, 1] - prev[:, 1]
    ) * (nxt[:, 0] - prev[:, 0])
    return np.ascontiguousarray(verts[np.abs(cross) > EPS_GEOM])


def _is_convex(verts):
    nxt = np.roll(verts, -1, axis=0)
    e = nxt - verts
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    return bool((cross > -EPS_GEOM).all())


def _canonical(verts):
    """Rotate vertex order to start at the lexicographically smallest."""
    i = np.lexsort((verts[:, 1], verts[:, 0]))[0]
    return np.roll(verts, -i, axis=0)


# ---------------------------------------------------------------------------
# operations


def perimeter(poly: ConvexPolygon) -> float:
    return _kernels.perimeter(poly.vertices)


def polygon_area(poly: ConvexPolygon) -> float:
    return _kernels.area(poly.vertices)


def diameter(poly: ConvexPolygon) -> float:
    """Max pairwise vertex distance (attained at vertices for convex sets)."""
    return _kernels.diameter(poly.vertices)


def project(poly: ConvexPolygon, theta: float) -> ProjectionSegment:
    """Extent of the polygon projected onto the unit vector at ``theta``."""
    lo, hi = _kernels.project(poly.vertices, math.cos(theta), math.sin(theta))
    return ProjectionSegment(lo, hi)


def contains(poly: ConvexPolygon, p) -> bool:
    if isinstance(p, Point2):
        x, y = p.x, p.y
    else:
        x, y = float(p[0]), float(p[1])
    return _kernels.contains(poly.vertices, x, y, EPS_GEOM)


def contains_many(poly: ConvexPolygon, pts) -> np.ndarray:
    """Vectorized ``contains`` over an (n, 2) array of points."""
    pts = np.ascontiguousarray(pts, dtype=float)
    return _kernels.contains_many(poly.vertices, pts, EPS_GEOM)


def split(poly: ConvexPolygon, cut: CutLine):
    """Split a polygon by a cut line into (below, above) children.

    The below child is the half whose projection onto the cut normal is
    smaller than the offset.  Raises CutMisses when the offset is outside
    the open projection interval and DegenerateCut when either child
    would have area below EPS_AREA.
    """
    ct, st = cut.normal
    lo, hi = _kernels.project(poly.vertices, ct, st)
    if not (lo < cut.offset < hi):
        raise CutMisses(
            f"offset {cut.offset} outside open projection interval ({lo}, {hi})"
        )
    below, above = _kernels.split(poly.vertices, ct, st, cut.offset, EPS_GEOM)
    if len(below) < 3 or len(above) < 3:
        raise DegenerateCut("cut grazes the polygon")
    if _kernels.area(below) < EPS_AREA or _kernels.area(above) < EPS_AREA:
        raise DegenerateCut("split child has negligible area")
    return (
        ConvexPolygon._from_trusted(below),
        ConvexPolygon._from_trusted(above),
    )


def intersect(a: ConvexPolygon, b: ConvexPolygon):
    """Convex intersection, or None when the overlap area is < EPS_AREA."""
    out = _kernels.clip_convex(a.vertices, b.vertices, EPS_GEOM)
    if len(out) < 3 or _kernels.area(out) < EPS_AREA:
        return None
    return ConvexPolygon._from_trusted(out)
