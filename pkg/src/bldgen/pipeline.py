"""JSON-configured generalisation runs from a 1:10K building layer.

Config document (``schema_version`` 1)::

    {
      "schema_version": 1,
      "source": "buildings.geojson",
      "target": "25K",                      # 25K | 50K | 250K
      "method": "agent",                    # agent | merge | agent+merge (25K/50K)
      "merge": {"preset": "os10k"},         # or buffer_size / min_edge_length / ...
      "urban": {"min_town_area": 750000},   # any UrbanParams field
      "scale": {"min_area_mm2": 0.4},       # any ScaleSpec field except the denominator
      "agent": {"micro_budget": 30, "meso_budget": 50, "join_dist": 15},
      "threads": 1,
      "reference": "vmd.geojson",           # optional
      "outputs": {"features": "out.geojson", "blocks": "blocks.geojson",
                  "svg": "out.svg", "summary": "summary.json", "metrics": "metrics.json"}
    }

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .agents import ScaleSpec, block_lifecycle
from .enrichment import UrbanParams, build_blocks, delineate_urban_areas
from .geom import id_key
from .io import Feature, FeatureSet, read_geojson, write_geojson
from .metrics import compare_metrics
from .morphology import PRESETS, MergeParams, merge_buildings
from .render import render_svg

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TARGETS = {"25K": 25_000, "50K": 50_000, "250K": 250_000}
DEFAULT_PRESET = {"25K": "os10k", "50K": "soi10k"}
METHODS = ("agent", "merge", "agent+merge")
OUTPUT_KEYS = ("features", "blocks", "svg", "summary", "metrics")


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class AgentParams:
    micro_budget: int = 30
    meso_budget: int = 50
    join_dist: float = 15.0
    density_tolerance: float = 0.5


@dataclass
class PipelineConfig:
    source: Path
    target: str
    method: str = "agent"
    merge: MergeParams = PRESETS["os10k"]
    urban: UrbanParams = UrbanParams()
    scale: ScaleSpec = ScaleSpec(25_000)
    agent: AgentParams = AgentParams()
    threads: int = 1
    reference: Optional[Path] = None
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ConfigError(f"unknown target {self.target!r}; expected one of {sorted(TARGETS)}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        unknown = set(self.outputs) - set(OUTPUT_KEYS)
        if unknown:
            raise ConfigError(f"unknown output keys: {sorted(unknown)}")
        paths = [Path(self.source).resolve()] + [Path(p).resolve() for p in self.outputs.values()]
        if self.reference:
            paths.append(Path(self.reference).resolve())
        if len(set(paths)) != len(paths):
            raise ConfigError("source, reference and output paths must be distinct")


def _build(cls, data: dict, section: str, **fixed):
    if not isinstance(data, dict):
        raise ConfigError(f"'{section}' must be an object")
    names = {f.name for f in dataclasses.fields(cls)} - set(fixed)
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {sorted(unknown)}")
    try:
        return cls(**data, **fixed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{section}': {exc}") from exc


def config_from_dict(doc: dict, base: Path = Path(".")) -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    allowed = {"schema_version", "source", "target", "method", "merge", "urban", "scale", "agent", "threads", "reference", "outputs"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "source" not in doc or "target" not in doc:
        raise ConfigError("config needs 'source' and 'target'")
    target = doc["target"]
    if target not in TARGETS:
        raise ConfigError(f"unknown target {target!r}; expected one of {sorted(TARGETS)}")

    merge_doc = dict(doc.get("merge") or {})
    preset = merge_doc.pop("preset", DEFAULT_PRESET.get(target, "os10k"))
    if preset not in PRESETS:
        raise ConfigError(f"unknown merge preset {preset!r}")
    merge = _build(MergeParams, {**dataclasses.asdict(PRESETS[preset]), **merge_doc}, "merge")

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    outputs = doc.get("outputs") or {}
    if not isinstance(outputs, dict):
        raise ConfigError("'outputs' must be an object")
    return PipelineConfig(
        source=resolve(doc["source"]),
        target=target,
        method=doc.get("method", "agent"),
        merge=merge,
        urban=_build(UrbanParams, doc.get("urban") or {}, "urban"),
        scale=_build(ScaleSpec, doc.get("scale") or {}, "scale", scale_denominator=TARGETS[target]),
        agent=_build(AgentParams, doc.get("agent") or {}, "agent"),
        threads=int(doc.get("threads", 1)),
        reference=resolve(doc["reference"]) if doc.get("reference") else None,
        outputs={k: resolve(v) for k, v in outputs.items()},
    )


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc, path.parent)


@dataclass
class RunSummary:
    target: str
    method: str
    source_features: int = 0
    output_features: int = 0
    blocks: int = 0
    eliminated: int = 0
    merged: int = 0
    unresolved_conflicts: int = 0
    metrics: Optional[dict] = None
    wall_time_s: float = 0.0
    outputs: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["outputs"] = {k: str(v) for k, v in self.outputs.items()}
        return d


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


def generalize_blocks(buildings, blocks, scale: ScaleSpec, agent: AgentParams, threads: int = 1):
    """Run every block lifecycle; results come back in block-id order."""
    lookup = {b.id: b for b in buildings}

    def run(blk):
        return block_lifecycle(blk, lookup, scale, agent.micro_budget, agent.meso_budget, agent.density_tolerance)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(b) for b in blocks]
    return sorted(results, key=lambda r: r.block_id)


def run_pipeline(cfg: PipelineConfig, threads: Optional[int] = None) -> RunSummary:
    t0 = time.perf_counter()
    threads = threads or cfg.threads
    summary = RunSummary(cfg.target, cfg.method)
    source = _stage("read", read_geojson, cfg.source)
    buildings = source.buildings()
    summary.source_features = len(buildings)

    if cfg.target == "250K":
        urban = _stage("urban", delineate_urban_areas, buildings, cfg.urban)
        out = FeatureSet(
            "urban",
            [Feature(u.id, u.footprint, {"area": round(u.area, 3), "building_count": u.building_count}) for u in urban],
        )
        summary.eliminated = sum(1 for b in buildings if not any(u.footprint.intersects(b.geometry) for u in urban))
    else:
        blocks = _stage("blocks", build_blocks, buildings, cfg.agent.join_dist, cfg.merge.arc_segments)
        summary.blocks = len(blocks)
        if "blocks" in cfg.outputs:
            bfs = FeatureSet("blocks", [Feature(b.id, b.footprint, {"building_ids": list(b.building_ids)}) for b in blocks])
            _stage("write", write_geojson, bfs, cfg.outputs["blocks"])
        out = FeatureSet("buildings")
        if cfg.method in ("agent", "agent+merge"):
            results = _stage("agent", generalize_blocks, buildings, blocks, cfg.scale, cfg.agent, threads)
            feats = []
            for r in results:
                merged_from = dict(r.merged)
                for i in sorted(r.members, key=id_key):
                    props = {"block": r.block_id}
                    if i in merged_from:
                        props["merged_from"] = list(merged_from[i])
                    feats.append(Feature(i, r.members[i], props))
                summary.eliminated += len(r.eliminated)
                summary.merged += len(r.merged)
                summary.unresolved_conflicts += len(r.unresolved)
            out = FeatureSet("buildings", feats)
        if cfg.method in ("merge", "agent+merge"):
            geoms = out.geometries() if cfg.method == "agent+merge" else [b.geometry for b in buildings]
            merged = _stage("merge", merge_buildings, geoms, cfg.merge)
            out = FeatureSet.from_geometries("buildings", list(merged.geoms))
            if cfg.method == "merge":
                summary.eliminated = sum(1 for b in buildings if not b.geometry.intersects(merged))
    summary.output_features = len(out)

    if "features" in cfg.outputs:
        _stage("write", write_geojson, out, cfg.outputs["features"])
    if "svg" in cfg.outputs and (source.features or out.features):
        _stage("render", render_svg, [FeatureSet("source", source.features), out], cfg.outputs["svg"])
    if cfg.reference is not None:
        ref = _stage("read", read_geojson, cfg.reference)
        report = _stage("metrics", compare_metrics, out, ref)
        summary.metrics = {k: v for k, v in report.as_dict().items() if k != "table"}
        if "metrics" in cfg.outputs:
            Path(cfg.outputs["metrics"]).write_text(json.dumps(report.as_dict(), indent=2, default=str) + "\n")
    summary.outputs = dict(cfg.outputs)
    summary.wall_time_s = time.perf_counter() - t0
    if "summary" in cfg.outputs:
        Path(cfg.outputs["summary"]).write_text(json.dumps(summary.as_dict(), indent=2, default=str) + "\n")
    log.info("pipeline %s/%s: %d -> %d features", cfg.target, cfg.method, summary.source_features, summary.output_features)
    return summary
