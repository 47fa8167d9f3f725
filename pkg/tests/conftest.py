import json

import pytest

from bldgen.io import Feature, FeatureSet, write_geojson

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def write_layer(tmp_path):
    """Write buildings or bare geometries to a GeoJSON file and return its path."""

    def _write(items, name="layer.geojson", layer="buildings"):
        feats = [Feature(getattr(x, "id", n), getattr(x, "geometry", x)) for n, x in enumerate(items, start=1)]
        path = tmp_path / name
        write_geojson(FeatureSet(layer, feats), path)
        return path

    return _write


@pytest.fixture
def write_json(tmp_path):
    def _write(doc, name):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return path

    return _write


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
