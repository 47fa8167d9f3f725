"""GeoJSON feature layers.

Coordinates are taken as projected meters. Output is deterministic:
features sorted by id, coordinates written with nine decimals.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import shapely
from shapely.geometry import MultiPolygon, Polygon, shape

from .geom import Building, as_multipolygon, id_key

log = logging.getLogger(__name__)

Geometry = Union[Polygon, MultiPolygon]


class DataError(Exception):
    """Input data problem; ``code`` tells the cases apart."""

    code = "data-error"


class UnreadableFileError(DataError):
    code = "unreadable"


class MalformedDocumentError(DataError):
    code = "malformed"


class NoPolygonsError(DataError):
    code = "no-polygons"


class DuplicateIdError(DataError):
    code = "duplicate-id"


@dataclass
class Feature:
    id: Union[int, str]
    geometry: Geometry
    properties: dict = field(default_factory=dict)


@dataclass
class FeatureSet:
    layer: str
    features: list[Feature] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.features)

    def __post_init__(self):
        seen = set()
        for f in self.features:
            if f.id in seen:
                raise DuplicateIdError(f"duplicate feature id {f.id!r} in layer {self.layer!r}")
            seen.add(f.id)

    @classmethod
    def from_geometries(cls, layer: str, geoms, properties=None) -> "FeatureSet":
        props = properties or [{} for _ in geoms]
        return cls(layer, [Feature(i, g, dict(p)) for i, (g, p) in enumerate(zip(geoms, props), start=1)])

    def buildings(self) -> list[Building]:
        """One Building per polygon; multipart features are split as ``id-k``."""
        out = []
        for f in self.features:
            parts = [f.geometry] if isinstance(f.geometry, Polygon) else list(f.geometry.geoms)
            if len(parts) == 1:
                out.append(Building(f.id, parts[0]))
            else:
                out.extend(Building(f"{f.id}-{k}", p) for k, p in enumerate(parts, start=1))
        return out

    def geometries(self) -> list[Geometry]:
        return [f.geometry for f in self.features]

    def sorted(self) -> list[Feature]:
        return sorted(self.features, key=lambda f: id_key(f.id))


def _repair(geom) -> Geometry | None:
    if not geom.is_valid:
        geom = shapely.make_valid(geom)
    mp = as_multipolygon(geom)
    if mp.is_empty:
        return None
    return mp.geoms[0] if len(mp.geoms) == 1 else mp


def read_geojson(path) -> FeatureSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection" or not isinstance(doc.get("features"), list):
        raise MalformedDocumentError(f"{path}: not a GeoJSON FeatureCollection")

    warnings: list[str] = []
    features: list[Feature] = []
    for n, item in enumerate(doc["features"], start=1):
        if not isinstance(item, dict) or item.get("type") != "Feature":
            raise MalformedDocumentError(f"{path}: entry {n} is not a Feature")
        props = item.get("properties") or {}
        fid = item.get("id", props.get("id", n))
        gj = item.get("geometry")
        gtype = gj.get("type") if isinstance(gj, dict) else None
        if gtype not in ("Polygon", "MultiPolygon"):
            warnings.append(f"feature {fid!r}: skipped non-polygonal geometry {gtype}")
            continue
        try:
            geom = _repair(shape(gj))
        except (ValueError, TypeError, AttributeError, shapely.errors.GEOSException) as exc:
            raise MalformedDocumentError(f"{path}: feature {fid!r} has bad coordinates ({exc})") from exc
        if geom is None:
            warnings.append(f"feature {fid!r}: empty after repair, skipped")
            continue
        features.append(Feature(fid, geom, dict(props)))

    if doc["features"] and not features:
        raise NoPolygonsError(f"{path}: no polygonal features")
    if features:
        b = shapely.bounds([f.geometry for f in features])
        if (abs(b[:, [0, 2]]) <= 180).all() and (abs(b[:, [1, 3]]) <= 90).all():
            warnings.append("coordinates look geographic (degrees); they are treated as meters")
    for w in warnings:
        log.warning(w)
    return FeatureSet(str(doc.get("name") or path.stem), features, warnings)


def _num(v: float) -> str:
    s = f"{v:.9f}"
    return "0.000000000" if s == "-0.000000000" else s


def _ring_json(coords) -> str:
    pts = list(coords)
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    return "[" + ",".join(f"[{_num(x)},{_num(y)}]" for x, y, *_ in pts) + "]"


def _polygon_json(p: Polygon) -> str:
    rings = [p.exterior, *p.interiors]
    return "[" + ",".join(_ring_json(r.coords) for r in rings) + "]"


def geometry_json(g: Geometry) -> str:
    if isinstance(g, Polygon):
        return '{"type":"Polygon","coordinates":' + _polygon_json(g) + "}"
    parts = ",".join(_polygon_json(p) for p in g.geoms)
    return '{"type":"MultiPolygon","coordinates":[' + parts + "]}"


def dumps_geojson(fs: FeatureSet) -> str:
    lines = []
    for f in fs.sorted():
        props = json.dumps(f.properties, sort_keys=True, separators=(",", ":"), default=str)
        fid = json.dumps(f.id)
        lines.append(f'{{"type":"Feature","id":{fid},"properties":{props},"geometry":{geometry_json(f.geometry)}}}')
    head = '{"type":"FeatureCollection","name":' + json.dumps(fs.layer) + ',"features":['
    return head + ("\n" + ",\n".join(lines) + "\n" if lines else "") + "]}\n"


def write_geojson(fs: FeatureSet, path) -> None:
    Path(path).write_text(dumps_geojson(fs), encoding="utf-8")
