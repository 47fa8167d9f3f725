"""Hypothesis strategies for planar building-like polygons."""

import math

import numpy as np
from hypothesis import strategies as st
from shapely import affinity
from shapely.geometry import MultiPoint

from bldgen.fixtures import l_shape
from bldgen.geom import make_polygon, rectangle

coord = st.floats(min_value=-500, max_value=500, allow_nan=False, allow_infinity=False)
side = st.floats(min_value=2.0, max_value=60.0)
angle = st.floats(min_value=0.0, max_value=180.0)


@st.composite
def rotated_rectangles(draw):
    x, y = draw(coord), draw(coord)
    w, h = draw(side), draw(side)
    return affinity.rotate(rectangle(x, y, w, h), draw(angle), origin="centroid")


@st.composite
def convex_polygons(draw, min_points=3, max_points=12):
    n = draw(st.integers(min_points, max_points))
    cx, cy = draw(coord), draw(coord)
    radius = draw(st.floats(min_value=3.0, max_value=50.0))
    thetas = sorted(draw(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=n, max_size=n, unique=True)))
    pts = [(cx + radius * math.cos(t), cy + radius * math.sin(t)) for t in thetas]
    hull = MultiPoint(pts).convex_hull
    if hull.geom_type != "Polygon" or hull.area < 1.0:
        hull = rectangle(cx, cy, radius, radius)
    return make_polygon(list(hull.exterior.coords))


@st.composite
def l_shapes(draw):
    w, h = draw(st.floats(12, 60)), draw(st.floats(12, 60))
    arm = draw(st.floats(3, min(w, h) / 2))
    p = l_shape(draw(coord), draw(coord), w, h, arm)
    return affinity.rotate(p, draw(angle), origin="centroid")


building_polygons = st.one_of(rotated_rectangles(), convex_polygons(), l_shapes())


def random_convex(rng: np.random.Generator):
    pts = rng.uniform(-30, 30, size=(int(rng.integers(3, 15)), 2))
    hull = MultiPoint([tuple(p) for p in pts]).convex_hull
    if hull.geom_type != "Polygon" or hull.area < 1.0:
        return rectangle(0, 0, 10, 7)
    return make_polygon(list(hull.exterior.coords))
