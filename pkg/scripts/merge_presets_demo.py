"""Merge the terraced-row scenes with both source presets and render overlays.

Shows the opening at work: houses narrower than twice the buffer vanish
along with the shed, wider houses fuse into one block.
"""

import argparse
from pathlib import Path

from bldgen.fixtures import terraced_row
from bldgen.io import Feature, FeatureSet
from bldgen.morphology import PRESETS, merge_buildings, merge_core
from bldgen.render import render_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out/merge")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'scene':24s} {'preset':7s} {'parts':>5s} {'core m2':>9s} {'final m2':>9s}")
    for size in (10.0, 12.0, 14.0, 15.0):
        for gap in (3.0, 20.0):
            row = terraced_row(gap=gap, size=size)
            src = FeatureSet("source", [Feature(b.id, b.geometry) for b in row])
            for name, params in PRESETS.items():
                merged = merge_buildings(row, params)
                core = merge_core(row, params.buffer_size)
                tag = f"house{size:g}_gap{gap:g}"
                print(f"{tag:24s} {name:7s} {len(merged.geoms):5d} {core.area:9.1f} {merged.area:9.1f}")
                if merged.geoms:
                    render_svg([src, FeatureSet.from_geometries("merged", list(merged.geoms))], out / f"{tag}_{name}.svg")


if __name__ == "__main__":
    main()
