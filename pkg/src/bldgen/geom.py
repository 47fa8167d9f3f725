"""Planar polygon kernel.

Geometry is carried as shapely ``Polygon`` / ``MultiPolygon`` objects in
projected meters. Everything returned from this module is normalised:
exterior rings counter-clockwise, holes clockwise, slivers below
``SLIVER_AREA`` discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np
import shapely
from shapely.geometry import LinearRing, MultiPolygon, Polygon
from shapely.geometry.polygon import orient

Coord = tuple[float, float]
Ring = list[Coord]
Polygonal = Union[Polygon, MultiPolygon]

SLIVER_AREA = 1e-6
DEFAULT_ARC_SEGMENTS = 8


class GeometryError(ValueError):
    """Raised for invalid or degenerate input geometry."""


# ---------------------------------------------------------------------------
# construction / normalisation
# ---------------------------------------------------------------------------


def ring_coords(ring) -> Ring:
    """Vertices of a ring without the closing repeat."""
    src = ring.coords if hasattr(ring, "coords") else ring
    coords = [(float(c[0]), float(c[1])) for c in src]
    if len(coords) > 1 and coords[0] == coords[-1]:
        coords = coords[:-1]
    return coords


def _check_ring(coords: Sequence[Coord]) -> None:
    if len(coords) < 3:
        raise GeometryError(f"ring needs at least 3 vertices, got {len(coords)}")
    arr = np.asarray(coords, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise GeometryError("ring has non-finite coordinates")
    if abs(signed_ring_area(coords)) == 0.0:
        raise GeometryError("ring has zero area")
    if not LinearRing(coords).is_simple:
        raise GeometryError("ring self-intersects")


def make_polygon(exterior: Sequence[Coord], holes: Iterable[Sequence[Coord]] = ()) -> Polygon:
    """Build a validated, orientation-normalised polygon."""
    exterior = ring_coords(exterior)
    holes = [ring_coords(h) for h in holes]
    _check_ring(exterior)
    for h in holes:
        _check_ring(h)
    poly = Polygon(exterior, holes)
    if not poly.is_valid:
        raise GeometryError(f"invalid polygon: {shapely.is_valid_reason(poly)}")
    return orient(poly, sign=1.0)


def rectangle(x0: float, y0: float, width: float, height: float) -> Polygon:
    return make_polygon([(x0, y0), (x0 + width, y0), (x0 + width, y0 + height), (x0, y0 + height)])


def as_multipolygon(geom) -> MultiPolygon:
    """Coerce any geometry to a normalised MultiPolygon.

    Non-polygonal pieces (from collections) and slivers are dropped.
    """
    if geom is None or geom.is_empty:
        return MultiPolygon()
    parts: list[Polygon] = []
    if isinstance(geom, Polygon):
        parts = [geom]
    elif hasattr(geom, "geoms"):
        for g in geom.geoms:
            parts.extend(as_multipolygon(g).geoms)
    parts = [orient(p, sign=1.0) for p in parts if p.area >= SLIVER_AREA]
    parts = [_drop_tiny_holes(p) for p in parts]
    parts.sort(key=lambda p: (p.centroid.x, p.centroid.y, p.area))
    return MultiPolygon(parts)


def _drop_tiny_holes(p: Polygon) -> Polygon:
    holes = [h for h in p.interiors if abs(signed_ring_area(ring_coords(h))) >= SLIVER_AREA]
    if len(holes) == len(p.interiors):
        return p
    return orient(Polygon(p.exterior, holes), sign=1.0)


def validate(geom) -> MultiPolygon:
    """Return ``geom`` as a MultiPolygon or raise GeometryError if invalid."""
    if isinstance(geom, (list, tuple)):
        return boolean_union(geom)
    if not isinstance(geom, (Polygon, MultiPolygon)):
        raise GeometryError(f"expected polygonal geometry, got {type(geom).__name__}")
    if not geom.is_empty and not geom.is_valid:
        raise GeometryError(f"invalid geometry: {shapely.is_valid_reason(geom)}")
    return as_multipolygon(geom)


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------


def signed_ring_area(coords: Sequence[Coord]) -> float:
    """Shoelace area; positive for counter-clockwise rings."""
    arr = np.asarray(coords, dtype=float)
    x, y = arr[:, 0], arr[:, 1]
    # shift to the first vertex to limit cancellation on large coordinates
    x = x - x[0]
    y = y - y[0]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def area(p: Polygonal) -> float:
    """Exterior area minus hole areas, in square meters."""
    if isinstance(p, MultiPolygon):
        return sum(area(q) for q in p.geoms)
    if not isinstance(p, Polygon) or p.is_empty:
        raise GeometryError("area() needs a non-empty polygon")
    ext = ring_coords(p.exterior)
    _check_ring(ext)
    if not p.is_valid:
        raise GeometryError(f"invalid polygon: {shapely.is_valid_reason(p)}")
    total = abs(signed_ring_area(ext))
    for h in p.interiors:
        total -= abs(signed_ring_area(ring_coords(h)))
    return total


def edge_lengths(coords: Sequence[Coord]) -> np.ndarray:
    arr = np.asarray(coords, dtype=float)
    return np.hypot(*(np.roll(arr, -1, axis=0) - arr).T)


def shortest_edge(p: Polygon) -> float:
    rings = [p.exterior, *p.interiors]
    return float(min(edge_lengths(ring_coords(r)).min() for r in rings))


def perimeter(p: Polygonal) -> float:
    return float(p.length)


# ---------------------------------------------------------------------------
# set operations (shapely/GEOS backed)
# ---------------------------------------------------------------------------


def signed_buffer(g: Polygonal, d: float, arc_segments: int = DEFAULT_ARC_SEGMENTS) -> MultiPolygon:
    """Dilate (``d > 0``) or erode (``d < 0``) with a disc of radius ``|d|``.

    Round joins use ``arc_segments`` segments per quarter circle.
    """
    if arc_segments < 4:
        raise ValueError("arc_segments must be >= 4")
    if not math.isfinite(d):
        raise ValueError("buffer distance must be finite")
    g = validate(g)
    if d == 0 or g.is_empty:
        return g
    out = g.buffer(d, quad_segs=arc_segments, join_style="round")
    return as_multipolygon(out)


def boolean_union(gs: Iterable) -> MultiPolygon:
    items = []
    for g in gs:
        if isinstance(g, (Polygon, MultiPolygon)):
            if not g.is_empty and not g.is_valid:
                raise GeometryError(f"invalid geometry: {shapely.is_valid_reason(g)}")
            items.append(g)
        else:
            raise GeometryError(f"expected polygonal geometry, got {type(g).__name__}")
    if not items:
        return MultiPolygon()
    return as_multipolygon(shapely.union_all(items))


def convex_hull(p: Polygonal) -> Polygon:
    hull = p.convex_hull
    if not isinstance(hull, Polygon) or hull.area == 0:
        raise GeometryError("convex hull is degenerate")
    return orient(hull, sign=1.0)


def min_separation(a: Polygonal, b: Polygonal) -> float:
    """Zero when touching or overlapping, else boundary-to-boundary distance."""
    return float(a.distance(b))


def hausdorff(a: Polygonal, b: Polygonal, densify: float = 0.1) -> float:
    """Symmetric Hausdorff distance between boundaries."""
    return float(shapely.hausdorff_distance(a.boundary, b.boundary, densify=densify))


# ---------------------------------------------------------------------------
# minimum bounding rectangle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MbrResult:
    angle: float  # orientation of the long side, degrees in [0, 180)
    width: float
    height: float
    rect: Polygon

    @property
    def area(self) -> float:
        return self.width * self.height


def min_bounding_rectangle(p: Polygonal) -> MbrResult:
    """Minimum-area enclosing rectangle, searched over hull edge directions."""
    if p.is_empty or p.area <= 0:
        raise GeometryError("degenerate polygon has no bounding rectangle")
    hull = np.asarray(ring_coords(convex_hull(p).exterior))
    origin = hull.mean(axis=0)
    pts = hull - origin
    best = None
    for i in range(len(pts)):
        e = pts[(i + 1) % len(pts)] - pts[i]
        n = math.hypot(*e)
        if n == 0:
            continue
        u = e / n
        v = np.array([-u[1], u[0]])
        pu, pv = pts @ u, pts @ v
        lu, lv = pu.max() - pu.min(), pv.max() - pv.min()
        a = lu * lv
        if best is None or a < best[0] * (1 - 1e-12):
            best = (a, u, v, pu.min(), pu.max(), pv.min(), pv.max())
    _, u, v, u0, u1, v0, v1 = best
    corners = [origin + u * cu + v * cv for cu, cv in ((u0, v0), (u1, v0), (u1, v1), (u0, v1))]
    rect = orient(Polygon([tuple(c) for c in corners]), sign=1.0)
    du, dv = u1 - u0, v1 - v0
    long_dir = u if du >= dv else v
    angle = math.degrees(math.atan2(long_dir[1], long_dir[0])) % 180.0
    if angle >= 180.0 - 1e-9:
        angle = 0.0
    return MbrResult(angle=float(angle), width=float(max(du, dv)), height=float(min(du, dv)), rect=rect)


# ---------------------------------------------------------------------------
# ring simplification / smoothing
# ---------------------------------------------------------------------------


def _point_segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(pts - a).T)
    t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(*(pts - proj).T)


def _dp_keep(pts: np.ndarray, tolerance: float) -> np.ndarray:
    """Douglas-Peucker keep-mask for an open chain, iterative."""
    keep = np.zeros(len(pts), dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, len(pts) - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        d = _point_segment_distance(pts[i + 1 : j], pts[i], pts[j])
        k = int(np.argmax(d))
        if d[k] > tolerance:
            k += i + 1
            keep[k] = True
            stack.append((k, j))
            stack.append((i, k))
    return keep


def _ring_is_valid(coords: Sequence[Coord]) -> bool:
    if len(coords) < 3:
        return False
    if abs(signed_ring_area(coords)) < SLIVER_AREA:
        return False
    return LinearRing(coords).is_simple


def _dp_ring(coords: Ring, tolerance: float) -> Ring:
    pts = np.asarray(coords, dtype=float)
    far = int(np.argmax(np.hypot(*(pts - pts[0]).T)))
    first = _dp_keep(pts[: far + 1], tolerance)
    second = _dp_keep(np.vstack([pts[far:], pts[:1]]), tolerance)
    keep = np.concatenate([first, second[1:-1]])
    return [coords[i] for i in np.flatnonzero(keep)]


def simplify_ring(ring: Sequence[Coord], tolerance: float) -> Ring:
    """Douglas-Peucker on a closed ring.

    The chain is split at vertex 0 and the vertex farthest from it. If the
    result is not a valid ring the tolerance is halved until it is; the
    input comes back unchanged as a last resort.
    """
    coords = ring_coords(ring)
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    if tolerance == 0 or len(coords) <= 3:
        return coords
    tol = tolerance
    for _ in range(12):
        out = _dp_ring(coords, tol)
        if _ring_is_valid(out):
            if signed_ring_area(out) * signed_ring_area(coords) > 0:
                return out
        tol /= 2
    return coords


def smooth_ring(ring: Sequence[Coord], iterations: int = 1) -> Ring:
    """Chaikin corner cutting at the 1/4 and 3/4 points of each edge."""
    if not 0 <= iterations <= 5:
        raise ValueError("iterations must be in [0, 5]")
    pts = np.asarray(ring_coords(ring), dtype=float)
    for _ in range(iterations):
        nxt = np.roll(pts, -1, axis=0)
        q = 0.75 * pts + 0.25 * nxt
        r = 0.25 * pts + 0.75 * nxt
        pts = np.empty((2 * len(q), 2))
        pts[0::2] = q
        pts[1::2] = r
    return [(float(x), float(y)) for x, y in pts]


def _map_rings(p: Polygon, fn) -> Polygon | None:
    ext = fn(ring_coords(p.exterior))
    holes = [fn(ring_coords(h)) for h in p.interiors]
    cand = Polygon(ext, [h for h in holes if _ring_is_valid(h)])
    if not cand.is_valid or cand.area < SLIVER_AREA:
        cand = Polygon(ext)
        if not cand.is_valid:
            return None
    return orient(cand, sign=1.0)


def simplify_polygon(p: Polygon, tolerance: float) -> Polygon:
    return _map_rings(p, lambda r: simplify_ring(r, tolerance)) or p


def smooth_polygon(p: Polygon, iterations: int = 1, max_shift: float | None = None) -> Polygon:
    """Chaikin-smooth every ring.

    With ``max_shift`` the rings are first segmentized so that no corner
    cut can move the boundary further than ``max_shift``: a cut reaches at
    most a quarter of the adjacent edges and halves with every pass.
    """
    if max_shift is not None and iterations:
        p = shapely.segmentize(p, max_segment_length=2.0 * max_shift)
    return _map_rings(p, lambda r: smooth_ring(r, iterations)) or p


# ---------------------------------------------------------------------------
# features
# ---------------------------------------------------------------------------


def id_key(i):
    """Sort key for feature ids that may mix ints and strings."""
    return (0, i, "") if isinstance(i, int) else (1, 0, str(i))


def centroid_key(g) -> tuple[float, float]:
    c = g.centroid
    return (round(c.x, 9), round(c.y, 9))


@dataclass(frozen=True)
class Building:
    """Identified building footprint with lazily cached shape measures."""

    id: int | str
    geometry: Polygon

    @cached_property
    def area(self) -> float:
        return area(self.geometry)

    @cached_property
    def shortest_edge(self) -> float:
        return shortest_edge(self.geometry)

    @cached_property
    def mbr(self) -> MbrResult:
        return min_bounding_rectangle(self.geometry)

    @cached_property
    def convexity(self) -> float:
        return self.area / convex_hull(self.geometry).area

    @cached_property
    def elongation(self) -> float:
        return self.mbr.height / self.mbr.width

    def with_geometry(self, geometry: Polygon) -> "Building":
        return Building(self.id, geometry)


def buildings_from(geoms: Iterable[Polygon], start: int = 1) -> list[Building]:
    return [Building(i, g) for i, g in enumerate(geoms, start=start)]
