"""Sweep grid pitch and report delineated footprint area against the town-size threshold."""

import argparse

import numpy as np

from bldgen.enrichment import UrbanParams, delineate_urban_areas, urban_core
from bldgen.fixtures import grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20, help="houses per grid side")
    ap.add_argument("--size", type=float, default=20.0, help="house side (m)")
    ap.add_argument("--pitches", type=float, nargs="+", default=list(np.arange(34.0, 52.0, 1.5)))
    ap.add_argument("--min-town-area", type=float, default=750_000.0)
    args = ap.parse_args()
    params = UrbanParams(min_town_area=args.min_town_area)
    print(f"{'pitch':>6s} {'core m2':>10s} {'towns':>5s} {'town m2':>10s}")
    for pitch in args.pitches:
        bs = grid(args.n, args.n, args.size, float(pitch))
        core = urban_core(bs, params)
        towns = delineate_urban_areas(bs, params)
        town_area = sum(t.area for t in towns)
        print(f"{pitch:6.1f} {core.area:10.0f} {len(towns):5d} {town_area:10.0f}")


if __name__ == "__main__":
    main()
