"""Synthetic building scenes used by the tests and experiment scripts."""

from __future__ import annotations

import math

import numpy as np
from shapely import affinity

from .geom import Building, make_polygon, rectangle


def terraced_row(gap: float = 3.0, n: int = 4, size: float = 10.0, shed: bool = True) -> list[Building]:
    """``n`` square houses in a row plus, optionally, an isolated 8x8 shed."""
    out = [Building(i + 1, rectangle(i * (size + gap), 0.0, size, size)) for i in range(n)]
    if shed:
        out.append(Building(n + 1, rectangle(n * (size + gap) + 60.0, 40.0, 8.0, 8.0)))
    return out


def grid(nx: int, ny: int, size: float = 20.0, pitch: float = 35.0, origin=(0.0, 0.0), start_id: int = 1) -> list[Building]:
    x0, y0 = origin
    out = []
    for j in range(ny):
        for i in range(nx):
            out.append(Building(start_id + len(out), rectangle(x0 + i * pitch, y0 + j * pitch, size, size)))
    return out


def l_shape(x0: float, y0: float, w: float, h: float, arm: float) -> "object":
    """L with outer size ``w`` x ``h`` and arm thickness ``arm``."""
    return make_polygon([(x0, y0), (x0 + w, y0), (x0 + w, y0 + arm), (x0 + arm, y0 + arm), (x0 + arm, y0 + h), (x0, y0 + h)])


def random_scene(rng: np.random.Generator, n_max: int = 30, extent: float = 200.0, lo: float = 5.0, hi: float = 40.0) -> list[Building]:
    """Rotated rectangles and L-shapes with footprint sides in [lo, hi]."""
    n = int(rng.integers(1, n_max + 1))
    out = []
    for i in range(n):
        w, h = rng.uniform(lo, hi, size=2)
        x, y = rng.uniform(0, extent, size=2)
        if rng.random() < 0.3 and min(w, h) > 2 * lo:
            p = l_shape(x, y, w, h, rng.uniform(lo, min(w, h) / 2))
        else:
            p = rectangle(x, y, w, h)
        p = affinity.rotate(p, float(rng.uniform(0, 90)), origin="centroid")
        out.append(Building(i + 1, p))
    return out


def parallelogram(x0: float, y0: float, base: float, height: float, angle_deg: float):
    off = height / math.tan(math.radians(angle_deg))
    return make_polygon([(x0, y0), (x0 + base, y0), (x0 + base + off, y0 + height), (x0 + off, y0 + height)])


def agent_block_12() -> list[Building]:
    """Twelve buildings on a 3x4 grid for 1:25K agent runs.

    Mix of slivers under the elimination area, small near-rectilinear
    houses that need enlarging and squaring, compliant houses, one house
    with a short chamfer, and one big building.
    """
    shapes = [
        rectangle(0, 0, 6, 6),                 # 36 m2, eliminated
        parallelogram(28, 0, 12.5, 12, 87),    # 150 m2, skewed
        rectangle(56, 0, 20, 20),              # compliant
        rectangle(0, 30, 15, 14),              # 210 m2
        parallelogram(28, 30, 14, 13, 88),     # 182 m2, skewed
        make_polygon([(56, 30), (76, 30), (76, 49.5), (75.5, 50), (56, 50)]),  # chamfered corner
        rectangle(0, 60, 9, 9),                # 81 m2, eliminated
        rectangle(28, 60, 18, 12),             # 216 m2
        rectangle(56, 60, 40, 36),             # 1440 m2, big
        rectangle(0, 90, 16, 16),              # 256 m2
        parallelogram(28, 90, 13, 13, 92),     # 169 m2, skewed
        rectangle(56, 100, 11, 12),            # 132 m2
    ]
    return [Building(i + 1, p) for i, p in enumerate(shapes)]


def crowded_block() -> list[Building]:
    """Two small houses that collide once enlarged, beside a big building."""
    return [
        Building(1, rectangle(0, 0, 40, 40)),
        Building(2, rectangle(45, 0, 12, 12)),
        Building(3, rectangle(45, 14, 12, 12)),
    ]


def random_block(rng: np.random.Generator, n_max: int = 8) -> list[Building]:
    """A handful of mostly rectangular buildings packed closely together."""
    n = int(rng.integers(1, n_max + 1))
    out = []
    for i in range(n):
        w, h = rng.uniform(4, 30, size=2)
        x, y = rng.uniform(0, 60, size=2)
        if rng.random() < 0.4:
            p = parallelogram(x, y, w, h, float(rng.uniform(80, 100)))
        else:
            p = rectangle(x, y, w, h)
        if rng.random() < 0.3:
            p = affinity.rotate(p, float(rng.uniform(0, 90)), origin="centroid")
        out.append(Building(i + 1, p))
    return out


# Pitches chosen so the delineated cores straddle the 750 000 m2 town size:
# about 594 600 m2 at 38 m and 798 800 m2 at 44.5 m (20x20 houses, 20 m side).
URBAN_SMALL_PITCH = 38.0
URBAN_LARGE_PITCH = 44.5


def urban_pair() -> tuple[list[Building], list[Building]]:
    return grid(20, 20, 20.0, URBAN_SMALL_PITCH), grid(20, 20, 20.0, URBAN_LARGE_PITCH)


def house_row(n: int = 6, gap: float = 10.0, size: float = 10.0) -> list[Building]:
    return [Building(i + 1, rectangle(i * (size + gap), 0.0, size, size)) for i in range(n)]


def dense_block() -> list[Building]:
    """Ten 101 m2 houses that double in size once enlarged at 1:25K, next
    to one big building; block density rises to about 1.6x the initial."""
    small = [Building(i + 1, rectangle(30.0 * (i % 5), 30.0 * (i // 5), 10.05, 10.05)) for i in range(10)]
    return small + [Building(99, rectangle(0, 65, 40, 36))]
