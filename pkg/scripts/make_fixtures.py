"""Write the synthetic scenes used in tests as GeoJSON (plus a pipeline config)."""

import argparse
import json
from pathlib import Path

from bldgen.fixtures import agent_block_12, crowded_block, dense_block, grid, terraced_row, urban_pair
from bldgen.io import Feature, FeatureSet, write_geojson


def scenes():
    small, large = urban_pair()
    return {
        "terraced_row": terraced_row(),
        "terraced_row_wide": terraced_row(gap=20.0),
        "agent_block_12": agent_block_12(),
        "crowded_block": crowded_block(),
        "dense_block": dense_block(),
        "urban_small": small,
        "urban_large": large,
        "dense_grid": grid(40, 40, 20.0, 35.0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="fixtures", help="output directory")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, buildings in scenes().items():
        fs = FeatureSet(name, [Feature(b.id, b.geometry) for b in buildings])
        write_geojson(fs, out / f"{name}.geojson")
        print(f"{name:20s} {len(fs):5d} buildings")
    cfg = {
        "schema_version": 1,
        "source": "agent_block_12.geojson",
        "target": "25K",
        "method": "agent",
        "outputs": {"features": "agent_25k.geojson", "svg": "agent_25k.svg", "summary": "agent_25k.json"},
    }
    (out / "pipeline_25k.json").write_text(json.dumps(cfg, indent=2) + "\n")


if __name__ == "__main__":
    main()
