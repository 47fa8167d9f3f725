"""Run the micro and meso agents on the synthetic blocks and print what happened."""

import argparse
from pathlib import Path

from bldgen.agents import ScaleSpec, block_lifecycle
from bldgen.enrichment import build_blocks
from bldgen.fixtures import agent_block_12, crowded_block, dense_block
from bldgen.io import Feature, FeatureSet
from bldgen.render import render_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", type=int, default=25_000, choices=(25_000, 50_000))
    ap.add_argument("--out-dir", default="out/agents")
    args = ap.parse_args()
    s = ScaleSpec(args.scale)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, scene in (("block12", agent_block_12()), ("crowded", crowded_block()), ("dense", dense_block())):
        by_id = {b.id: b for b in scene}
        feats = []
        for blk in build_blocks(scene, 15.0):
            res = block_lifecycle(blk, by_id, s)
            print(f"{name} block {blk.id}: phase-1 {res.phase1_aggregate:.3f} -> {res.aggregate:.3f}, "
                  f"{res.meso_states} meso states, eliminated {res.eliminated}, merged {res.merged}, "
                  f"unresolved {res.unresolved}")
            for i, o in sorted(res.micro.items()):
                acts = ",".join(a.kind.value for a in o.actions) or "-"
                fate = "eliminated" if o.eliminated else f"{o.building.geometry.area:7.1f} m2"
                print(f"    {i!s:>4}: {by_id[i].area:7.1f} m2 -> {fate}  [{acts}] {o.states_visited} states")
            feats += [Feature(i, g) for i, g in res.members.items()]
        src = FeatureSet("source", [Feature(b.id, b.geometry) for b in scene])
        render_svg([src, FeatureSet("generalised", feats)], out / f"{name}.svg")


if __name__ == "__main__":
    main()
