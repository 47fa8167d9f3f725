import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely import affinity

from bldgen.fixtures import random_scene, terraced_row
from bldgen.geom import rectangle
from bldgen.io import Feature, FeatureSet
from bldgen.metrics import MetricsError, compare_metrics


def layer(geoms, name="x"):
    return FeatureSet(name, [Feature(i + 1, g) for i, g in enumerate(geoms)])


def test_identity():
    fs = layer([b.geometry for b in terraced_row()])
    m = compare_metrics(fs, fs)
    assert m.areal_iou == 1.0 and m.count_ratio == 1.0 and m.mean_hausdorff == 0.0
    assert m.unmatched_out == m.unmatched_ref == 0


def test_disjoint():
    m = compare_metrics(layer([rectangle(0, 0, 10, 10)]), layer([rectangle(50, 0, 10, 10)]))
    assert m.areal_iou == 0.0 and m.matched == 0
    assert math.isnan(m.mean_hausdorff) and m.unmatched_out == 1


def test_translated_square():
    sq = rectangle(0, 0, 20, 20)
    m = compare_metrics(layer([affinity.translate(sq, 1.0, 0.0)]), layer([sq]))
    assert m.mean_hausdorff == pytest.approx(1.0, abs=1e-9)
    assert m.areal_iou == pytest.approx(380 / 420)


def test_count_ratio():
    m = compare_metrics(layer([rectangle(0, 0, 10, 10)]), layer([rectangle(0, 0, 10, 10), rectangle(20, 0, 5, 5)]))
    assert m.count_ratio == 0.5 and m.unmatched_ref == 1


def test_both_empty():
    with pytest.raises(MetricsError):
        compare_metrics(FeatureSet("a"), FeatureSet("b"))


def test_greedy_prefers_larger_overlap():
    out = layer([rectangle(0, 0, 10, 10)])
    ref = layer([rectangle(8, 0, 10, 10), rectangle(-1, 0, 10, 10)])
    m = compare_metrics(out, ref)
    assert m.table[0]["ref_id"] == 2


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_symmetry(s1, s2):
    a = layer([b.geometry for b in random_scene(np.random.default_rng(s1), n_max=8, extent=60)])
    b = layer([b.geometry for b in random_scene(np.random.default_rng(s2), n_max=8, extent=60)])
    ab, ba = compare_metrics(a, b), compare_metrics(b, a)
    assert ab.areal_iou == pytest.approx(ba.areal_iou, abs=1e-12)
    assert 0.0 <= ab.areal_iou <= 1.0
    assert sorted(r["hausdorff"] for r in ab.table) == pytest.approx(sorted(r["hausdorff"] for r in ba.table))
