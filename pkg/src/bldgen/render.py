"""Static SVG overlays of feature layers."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence, Union
from xml.sax.saxutils import quoteattr

from shapely.geometry import Polygon

from .io import FeatureSet


@dataclass(frozen=True)
class LayerStyle:
    fill: str = "#9e9e9e"
    stroke: str = "#424242"
    stroke_width: float = 0.5
    opacity: float = 0.6


PALETTE = (
    LayerStyle("#d9d9d9", "#7f7f7f", 0.4, 0.9),
    LayerStyle("#e6550d", "#7f2704", 0.6, 0.55),
    LayerStyle("#3182bd", "#08519c", 0.6, 0.45),
    LayerStyle("#31a354", "#006d2c", 0.6, 0.45),
)


class RenderError(ValueError):
    pass


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _path_data(g, maxy: float) -> str:
    polys = [g] if isinstance(g, Polygon) else list(g.geoms)
    out = []
    for p in polys:
        for ring in (p.exterior, *p.interiors):
            pts = list(ring.coords)[:-1]
            out.append("M" + " L".join(f"{_fmt(x)} {_fmt(maxy - y)}" for x, y, *_ in pts) + " Z")
    return " ".join(out)


def render_svg(
    layers: Sequence[FeatureSet],
    path,
    style: Union[Mapping[str, LayerStyle], Sequence[LayerStyle], None] = None,
    pad_fraction: float = 0.02,
    width_px: int = 1000,
) -> str:
    """Write one ``<g>`` per layer, in order, and return the SVG text."""
    if not layers:
        raise RenderError("need at least one layer")
    bounds = [f.geometry.bounds for fs in layers for f in fs.features]
    if not bounds:
        raise RenderError("nothing to draw: empty envelope")
    minx = min(b[0] for b in bounds)
    miny = min(b[1] for b in bounds)
    maxx = max(b[2] for b in bounds)
    maxy = max(b[3] for b in bounds)
    pad = max(pad_fraction * max(maxx - minx, maxy - miny), 1.0)
    minx, miny, maxx, maxy = minx - pad, miny - pad, maxx + pad, maxy + pad
    w, h = maxx - minx, maxy - miny
    height_px = max(1, round(width_px * h / w))

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width_px}" height="{height_px}" '
        f'viewBox="{_fmt(minx)} 0 {_fmt(w)} {_fmt(h)}">',
    ]
    for n, fs in enumerate(layers):
        st = _style_for(style, fs.layer, n)
        lines.append(
            f'<g id={quoteattr(fs.layer)} fill="{st.fill}" stroke="{st.stroke}" '
            f'stroke-width="{_fmt(st.stroke_width)}" fill-opacity="{_fmt(st.opacity)}" fill-rule="evenodd">'
        )
        for f in fs.sorted():
            lines.append(f'<path data-id={quoteattr(str(f.id))} d="{_path_data(f.geometry, maxy)}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _style_for(style, layer: str, n: int) -> LayerStyle:
    if isinstance(style, Mapping) and layer in style:
        return style[layer]
    if isinstance(style, Sequence) and n < len(style):
        return style[n]
    return PALETTE[n % len(PALETTE)]
