"""Building generalisation: morphological merging, urban-area delineation
and constraint-driven building/block agents."""

from .agents import ScaleSpec, block_lifecycle, building_lifecycle, measure_shape
from .enrichment import Block, UrbanArea, UrbanParams, build_blocks, delineate_urban_areas
from .geom import Building, GeometryError
from .morphology import PRESETS, MergeParams, merge_buildings

__all__ = [
    "Block",
    "Building",
    "GeometryError",
    "MergeParams",
    "PRESETS",
    "ScaleSpec",
    "UrbanArea",
    "UrbanParams",
    "block_lifecycle",
    "build_blocks",
    "building_lifecycle",
    "delineate_urban_areas",
    "measure_shape",
    "merge_buildings",
]
