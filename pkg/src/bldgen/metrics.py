"""Cartometric comparison of an output layer against a reference layer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import shapely

from .geom import hausdorff, id_key
from .io import FeatureSet


class MetricsError(ValueError):
    pass


@dataclass
class MetricsReport:
    areal_iou: float
    count_ratio: float
    mean_hausdorff: float
    matched: int
    unmatched_out: int
    unmatched_ref: int
    table: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "areal_iou": self.areal_iou,
            "count_ratio": self.count_ratio,
            "mean_hausdorff": self.mean_hausdorff,
            "matched": self.matched,
            "unmatched_out": self.unmatched_out,
            "unmatched_ref": self.unmatched_ref,
            "table": self.table,
        }


def compare_metrics(out: FeatureSet, ref: FeatureSet) -> MetricsReport:
    """Areal IoU, count ratio and mean Hausdorff over greedily matched pairs.

    Pairs are matched by decreasing overlap area; unmatched features are
    counted, not averaged in.
    """
    if not out.features and not ref.features:
        raise MetricsError("both layers are empty; metrics are undefined")
    a = shapely.union_all(out.geometries()) if out.features else None
    b = shapely.union_all(ref.geometries()) if ref.features else None
    if a is None or b is None:
        iou = 0.0
    else:
        union = a.union(b).area
        iou = a.intersection(b).area / union if union > 0 else 0.0
    count_ratio = len(out) / len(ref) if ref.features else math.inf

    cands = []
    tree = shapely.STRtree(ref.geometries()) if ref.features else None
    for f in out.features:
        if tree is None:
            break
        for k in tree.query(f.geometry):
            r = ref.features[int(k)]
            ov = f.geometry.intersection(r.geometry).area
            if ov > 0:
                cands.append((-ov, id_key(f.id), id_key(r.id), f, r))
    cands.sort(key=lambda t: t[:3])
    used_out, used_ref, table = set(), set(), []
    for neg_ov, _, _, f, r in cands:
        if f.id in used_out or r.id in used_ref:
            continue
        used_out.add(f.id)
        used_ref.add(r.id)
        union = f.geometry.union(r.geometry).area
        table.append(
            {
                "out_id": f.id,
                "ref_id": r.id,
                "iou": -neg_ov / union,
                "hausdorff": hausdorff(f.geometry, r.geometry),
            }
        )
    mean_h = sum(row["hausdorff"] for row in table) / len(table) if table else math.nan
    return MetricsReport(
        areal_iou=iou,
        count_ratio=count_ratio,
        mean_hausdorff=mean_h,
        matched=len(table),
        unmatched_out=len(out) - len(table),
        unmatched_ref=len(ref) - len(table),
        table=table,
    )
