import json

import pytest

from bldgen.fixtures import agent_block_12, terraced_row, urban_pair
from bldgen.io import FeatureSet, read_geojson, write_geojson
from bldgen.pipeline import ConfigError, PipelineError, config_from_dict, load_config, run_pipeline


def config(tmp_path, source, **over):
    doc = {
        "schema_version": 1,
        "source": str(source),
        "target": "25K",
        "outputs": {k: str(tmp_path / f"out.{k}.{ext}") for k, ext in
                    (("features", "geojson"), ("svg", "svg"), ("summary", "json"), ("blocks", "geojson"))},
    }
    doc.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def test_25k_terraced_row(tmp_path, write_layer):
    src = write_layer(terraced_row())
    summary = run_pipeline(load_config(config(tmp_path, src)))
    assert summary.source_features == 5
    assert (tmp_path / "out.features.geojson").exists()
    assert (tmp_path / "out.svg.svg").read_text().startswith("<?xml")
    saved = json.loads((tmp_path / "out.summary.json").read_text())
    assert saved["output_features"] == summary.output_features == len(read_geojson(tmp_path / "out.features.geojson"))


def test_merge_method(tmp_path, write_layer):
    src = write_layer(terraced_row(gap=3.0, size=15.0))
    summary = run_pipeline(load_config(config(tmp_path, src, method="merge", merge={"preset": "os10k"})))
    assert summary.output_features == 1 and summary.eliminated == 1


def test_250k(tmp_path, write_layer):
    _, large = urban_pair()
    src = write_layer(large)
    summary = run_pipeline(load_config(config(tmp_path, src, target="250K")))
    assert summary.output_features == 1


def test_empty_source(tmp_path):
    src = tmp_path / "empty.geojson"
    write_geojson(FeatureSet("empty"), src)
    summary = run_pipeline(load_config(config(tmp_path, src)))
    assert summary.source_features == 0 and summary.output_features == 0
    assert len(read_geojson(tmp_path / "out.features.geojson")) == 0


def test_unknown_target(tmp_path):
    with pytest.raises(ConfigError):
        load_config(config(tmp_path, tmp_path / "x.geojson", target="100K"))


@pytest.mark.parametrize("bad", [{"schema_version": 2}, {"bogus": 1}, {"method": "magic"}, {"merge": {"preset": "zz"}},
                                 {"urban": {"dilate_dist": 1, "erode_dist": 5}}, {"scale": {"scale_denominator": 5}},
                                 {"threads": 0}])
def test_config_rejects(tmp_path, bad):
    doc = {"schema_version": 1, "source": "s.geojson", "target": "25K", **bad}
    with pytest.raises(ConfigError):
        config_from_dict(doc, tmp_path)


def test_config_paths_distinct(tmp_path):
    doc = {"schema_version": 1, "source": "s.geojson", "target": "25K", "outputs": {"features": "s.geojson"}}
    with pytest.raises(ConfigError):
        config_from_dict(doc, tmp_path)


def test_stage_tagged_error(tmp_path):
    bad = tmp_path / "bad.geojson"
    bad.write_text("{")
    with pytest.raises(PipelineError) as info:
        run_pipeline(load_config(config(tmp_path, bad)))
    assert info.value.stage == "read"


def test_metrics_output(tmp_path, write_layer):
    src = write_layer(agent_block_12())
    ref = write_layer(agent_block_12(), name="ref.geojson")
    cfg = config(tmp_path, src, reference=str(ref))
    doc = json.loads(cfg.read_text())
    doc["outputs"]["metrics"] = str(tmp_path / "m.json")
    cfg.write_text(json.dumps(doc))
    summary = run_pipeline(load_config(cfg))
    assert 0 < summary.metrics["areal_iou"] <= 1
    assert json.loads((tmp_path / "m.json").read_text())["matched"] >= 1


def test_threads_do_not_change_outputs(tmp_path, write_layer):
    src = write_layer(agent_block_12())
    outs = []
    for n in (1, 4):
        d = tmp_path / f"t{n}"
        d.mkdir()
        summary = run_pipeline(load_config(config(d, src)), threads=n)
        outs.append(((d / "out.features.geojson").read_bytes(), (d / "out.svg.svg").read_bytes()))
    assert outs[0] == outs[1]
