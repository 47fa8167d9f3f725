"""Enrichment: urban-area delineation and block construction."""

from __future__ import annotations

from dataclasses import dataclass

from shapely.geometry import MultiPolygon, Polygon

from .geom import (
    DEFAULT_ARC_SEGMENTS,
    Building,
    boolean_union,
    centroid_key,
    id_key,
    signed_buffer,
    simplify_polygon,
    smooth_polygon,
)
from .morphology import closure, fill_small_holes

# boundary smoothing may move the outline by at most this share of dilate_dist
SMOOTH_SHIFT_RATIO = 0.1


@dataclass(frozen=True)
class UrbanParams:
    dilate_dist: float = 25.0
    erode_dist: float = 10.0
    min_town_area: float = 750_000.0
    boundary_simplify_tol: float = 25.0
    smooth_iterations: int = 1
    arc_segments: int = DEFAULT_ARC_SEGMENTS

    def __post_init__(self):
        if not self.dilate_dist > self.erode_dist >= 0:
            raise ValueError("need dilate_dist > erode_dist >= 0")
        if not self.min_town_area > 0:
            raise ValueError("min_town_area must be > 0")
        if self.boundary_simplify_tol < 0:
            raise ValueError("boundary_simplify_tol must be >= 0")
        if not 0 <= self.smooth_iterations <= 5:
            raise ValueError("smooth_iterations must be in [0, 5]")


@dataclass(frozen=True)
class UrbanArea:
    id: int
    footprint: Polygon
    area: float
    building_count: int


@dataclass(frozen=True)
class Block:
    id: int
    footprint: Polygon
    building_ids: tuple


def urban_core(buildings: list[Building], params: UrbanParams) -> MultiPolygon:
    """Dilated-then-eroded settlement footprint with artefact holes filled,
    before the size threshold and boundary clean-up."""
    u = boolean_union([b.geometry for b in buildings])
    if u.is_empty:
        return u
    grown = signed_buffer(u, params.dilate_dist, params.arc_segments)
    shrunk = signed_buffer(grown, -params.erode_dist, params.arc_segments) if params.erode_dist > 0 else grown
    return fill_small_holes(shrunk, params.min_town_area / 10)


def delineate_urban_areas(buildings: list[Building], params: UrbanParams = UrbanParams()) -> list[UrbanArea]:
    core = urban_core(buildings, params)
    areas = []
    for part in core.geoms:
        if part.area < params.min_town_area:
            continue
        shape = part
        if params.boundary_simplify_tol > 0:
            shape = simplify_polygon(shape, params.boundary_simplify_tol)
        if params.smooth_iterations:
            shape = smooth_polygon(shape, params.smooth_iterations, max_shift=SMOOTH_SHIFT_RATIO * params.dilate_dist)
        # clean-up may nibble the boundary; the size constraint holds on the output
        if shape.area < params.min_town_area:
            continue
        count = sum(1 for b in buildings if shape.intersects(b.geometry))
        if count == 0:
            continue
        areas.append((shape, count))
    areas.sort(key=lambda t: centroid_key(t[0]))
    return [UrbanArea(i, s, s.area, n) for i, (s, n) in enumerate(areas, start=1)]


def build_blocks(
    buildings: list[Building], join_dist: float = 15.0, arc_segments: int = DEFAULT_ARC_SEGMENTS
) -> list[Block]:
    """Group buildings into blocks: connected components of their closure."""
    if not join_dist > 0:
        raise ValueError("join_dist must be > 0")
    if not buildings:
        return []
    comps = list(closure(boolean_union([b.geometry for b in buildings]), join_dist, arc_segments).geoms)
    comps.sort(key=centroid_key)
    members: list[list] = [[] for _ in comps]
    for b in buildings:
        c = b.geometry.centroid
        idx = next((i for i, f in enumerate(comps) if f.covers(c)), None)
        if idx is None:
            overlaps = [f.intersection(b.geometry).area for f in comps]
            idx = max(range(len(comps)), key=lambda i: (overlaps[i], -i))
        members[idx].append(b.id)
    blocks = []
    for footprint, ids in zip(comps, members):
        if ids:
            blocks.append(Block(len(blocks) + 1, footprint, tuple(sorted(ids, key=id_key))))
    return blocks

