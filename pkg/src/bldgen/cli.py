"""Command-line entry point: ``bldgen <subcommand> ...``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from .agents import ScaleSpec
from .enrichment import UrbanParams, build_blocks, delineate_urban_areas
from .geom import GeometryError
from .io import DataError, Feature, FeatureSet, read_geojson, write_geojson
from .metrics import MetricsError, compare_metrics
from .morphology import PRESETS, CapacityError, MergeParams, merge_buildings
from .pipeline import AgentParams, ConfigError, PipelineError, generalize_blocks, load_config, run_pipeline
from .render import RenderError, render_svg

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("bldgen")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _Help(argparse.ArgumentDefaultsHelpFormatter):
    pass


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _non_negative(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bldgen", description="Building generalisation from 1:10K footprints.", formatter_class=_Help)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("merge", help="morphological merging (closure, opening, edge removal)", formatter_class=_Help)
    m.add_argument("--in", dest="inp", required=True, help="source GeoJSON")
    m.add_argument("--out", required=True, help="output GeoJSON")
    m.add_argument("--preset", choices=sorted(PRESETS), default=None, help="os10k: buffer 7, edge 1; soi10k: buffer 6, edge 1")
    m.add_argument("--buffer", type=_positive, default=None, help="buffer size in m (default 7, or the preset's)")
    m.add_argument("--edge", type=_non_negative, default=None, help="minimum edge length in m (default 1, or the preset's)")
    m.add_argument("--arc-segments", type=int, default=8, help="segments per quarter circle")
    m.add_argument("--min-result-area", type=_non_negative, default=0.0, help="drop output parts smaller than this (m2)")
    m.add_argument("--keep-lost", action="store_true", help="re-insert buildings the opening removed")

    u = sub.add_parser("urban", help="delineate urban areas", formatter_class=_Help)
    u.add_argument("--in", dest="inp", required=True)
    u.add_argument("--out", required=True)
    u.add_argument("--min-town-area", type=_positive, default=750_000.0, help="minimum town size in m2")
    u.add_argument("--dilate", type=_positive, default=25.0, help="dilation distance in m")
    u.add_argument("--erode", type=_non_negative, default=10.0, help="erosion distance in m")
    u.add_argument("--simplify-tol", type=_non_negative, default=25.0, help="boundary simplification tolerance in m")
    u.add_argument("--smooth", type=int, default=1, choices=range(0, 6), metavar="N", help="Chaikin iterations (0-5)")

    b = sub.add_parser("blocks", help="group buildings into blocks", formatter_class=_Help)
    b.add_argument("--in", dest="inp", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--join-dist", type=_positive, default=15.0, help="closure distance in m")

    a = sub.add_parser("agent", help="micro/meso agent generalisation", formatter_class=_Help)
    a.add_argument("--in", dest="inp", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--scale", type=int, choices=(25000, 50000), default=25000, help="target scale denominator")
    a.add_argument("--budget", type=int, default=30, help="micro lifecycle state budget")
    a.add_argument("--meso-budget", type=int, default=50, help="meso lifecycle state budget")
    a.add_argument("--join-dist", type=_positive, default=15.0, help="block closure distance in m")
    a.add_argument("--threads", type=int, default=1, help="worker threads (output unaffected)")

    pl = sub.add_parser("pipeline", help="run a JSON-configured pipeline", formatter_class=_Help)
    pl.add_argument("--config", required=True, help="pipeline config JSON")
    pl.add_argument("--threads", type=int, default=None, help="override the config's thread count")

    me = sub.add_parser("metrics", help="compare an output layer with a reference", formatter_class=_Help)
    me.add_argument("--out", required=True, help="generalised layer")
    me.add_argument("--ref", required=True, help="reference layer")
    me.add_argument("--report", required=True, help="JSON report path")

    r = sub.add_parser("render", help="render layers to SVG", formatter_class=_Help)
    r.add_argument("--layers", nargs="+", required=True, help="GeoJSON layers, bottom first")
    r.add_argument("--svg", required=True, help="output SVG")
    return p


def _merge(args) -> None:
    base = PRESETS[args.preset] if args.preset else PRESETS["os10k"]
    params = MergeParams(
        buffer_size=args.buffer if args.buffer is not None else base.buffer_size,
        min_edge_length=args.edge if args.edge is not None else base.min_edge_length,
        arc_segments=args.arc_segments,
        min_result_area=args.min_result_area,
        keep_original_if_lost=args.keep_lost,
    )
    src = read_geojson(args.inp)
    merged = merge_buildings(src.geometries(), params)
    write_geojson(FeatureSet.from_geometries("merged", list(merged.geoms)), args.out)
    log.info("merge: %d -> %d polygons", len(src), len(merged.geoms))


def _urban(args) -> None:
    params = UrbanParams(args.dilate, args.erode, args.min_town_area, args.simplify_tol, args.smooth)
    src = read_geojson(args.inp)
    areas = delineate_urban_areas(src.buildings(), params)
    feats = [Feature(a.id, a.footprint, {"area": round(a.area, 3), "building_count": a.building_count}) for a in areas]
    write_geojson(FeatureSet("urban", feats), args.out)


def _blocks(args) -> None:
    src = read_geojson(args.inp)
    blocks = build_blocks(src.buildings(), args.join_dist)
    feats = [Feature(b.id, b.footprint, {"building_ids": list(b.building_ids)}) for b in blocks]
    write_geojson(FeatureSet("blocks", feats), args.out)


def _agent(args) -> None:
    if args.budget < 1 or args.meso_budget < 1 or args.threads < 1:
        raise UsageError("budgets and --threads must be >= 1")
    src = read_geojson(args.inp)
    buildings = src.buildings()
    blocks = build_blocks(buildings, args.join_dist)
    params = AgentParams(args.budget, args.meso_budget, args.join_dist)
    results = generalize_blocks(buildings, blocks, ScaleSpec(args.scale), params, args.threads)
    feats = [Feature(i, g, {"block": r.block_id}) for r in results for i, g in r.members.items()]
    write_geojson(FeatureSet("buildings", feats), args.out)


def _pipeline(args) -> None:
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")
    cfg = load_config(args.config)
    summary = run_pipeline(cfg, threads=args.threads)
    print(json.dumps({k: v for k, v in summary.as_dict().items() if k != "outputs"}, default=str))


def _metrics(args) -> None:
    report = compare_metrics(read_geojson(args.out), read_geojson(args.ref))
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2, default=str)
        fh.write("\n")


def _render(args) -> None:
    render_svg([read_geojson(p) for p in args.layers], args.svg)


COMMANDS = {
    "merge": _merge,
    "urban": _urban,
    "blocks": _blocks,
    "agent": _agent,
    "pipeline": _pipeline,
    "metrics": _metrics,
    "render": _render,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("BLDGEN_LOG", "WARNING").upper(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        print(f"bldgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"bldgen: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (DataError, GeometryError, MetricsError, RenderError, CapacityError, OSError)):
            return EXIT_DATA
        return EXIT_INTERNAL
    except (DataError, GeometryError, MetricsError, RenderError, CapacityError, OSError) as exc:
        print(f"bldgen: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"bldgen: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
