# swarm_plot.py
"""Static SVG swarm plot of per-sample hyperparameter attributions."""
from typing import List

import numpy as np
import pandas as pd
from jinja2 import Environment

WIDTH = 760
BAND_HEIGHT = 44
MARGIN_LEFT = 90
MARGIN_RIGHT = 120
MARGIN_TOP = 40
MARGIN_BOTTOM = 56
POINT_RADIUS = 2.2

# violet -> teal -> yellow, low to high feature value
COLOR_STOPS = ((0.0, (0x44, 0x01, 0x54)), (0.5, (0x21, 0x91, 0x8C)), (1.0, (0xFD, 0xE7, 0x25)))

_SVG_TEMPLATE = """<svg xmlns="http://www.w3.org/2000/svg" width="{{ width }}" height="{{ height }}" viewBox="0 0 {{ width }} {{ height }}" font-family="Helvetica, Arial, sans-serif" font-size="12">
<defs>
<linearGradient id="feature-value" x1="0" y1="1" x2="0" y2="0">
{%- for stop in gradient %}
<stop offset="{{ stop.offset }}" stop-color="{{ stop.color }}"/>
{%- endfor %}
</linearGradient>
</defs>
<rect x="0" y="0" width="{{ width }}" height="{{ height }}" fill="#ffffff"/>
<text x="{{ plot_left }}" y="22" font-size="14" font-weight="bold">{{ title }}</text>
{%- for band in bands %}
<g class="band" data-feature="{{ band.feature }}">
<rect x="{{ plot_left }}" y="{{ band.top }}" width="{{ plot_width }}" height="{{ band_height }}" fill="{{ band.fill }}"/>
<text x="{{ plot_left - 8 }}" y="{{ band.center }}" text-anchor="end" dominant-baseline="middle">{{ band.feature }}</text>
{%- for point in band.points %}
<circle cx="{{ point.x }}" cy="{{ point.y }}" r="{{ radius }}" fill="{{ point.color }}" fill-opacity="0.8"/>
{%- endfor %}
</g>
{%- endfor %}
{%- if not bands %}
<text x="{{ plot_left + plot_width / 2 }}" y="{{ plot_top + 40 }}" text-anchor="middle" fill="#666666">no data</text>
{%- endif %}
<line x1="{{ zero_x }}" y1="{{ plot_top }}" x2="{{ zero_x }}" y2="{{ plot_bottom }}" stroke="#888888" stroke-dasharray="4 3"/>
<line x1="{{ plot_left }}" y1="{{ plot_bottom }}" x2="{{ plot_left + plot_width }}" y2="{{ plot_bottom }}" stroke="#000000"/>
{%- for tick in ticks %}
<line x1="{{ tick.x }}" y1="{{ plot_bottom }}" x2="{{ tick.x }}" y2="{{ plot_bottom + 5 }}" stroke="#000000"/>
<text x="{{ tick.x }}" y="{{ plot_bottom + 18 }}" text-anchor="middle">{{ tick.label }}</text>
{%- endfor %}
<text x="{{ plot_left + plot_width / 2 }}" y="{{ plot_bottom + 40 }}" text-anchor="middle">SHAP value (impact on AOCC)</text>
<rect x="{{ legend_x }}" y="{{ plot_top }}" width="12" height="{{ legend_height }}" fill="url(#feature-value)"/>
<text x="{{ legend_x + 18 }}" y="{{ plot_top + 10 }}">high</text>
<text x="{{ legend_x + 18 }}" y="{{ plot_top + legend_height }}">low</text>
<text x="{{ legend_x + 6 }}" y="{{ plot_top + legend_height + 18 }}" text-anchor="middle">feature value</text>
</svg>
"""

_env = Environment(autoescape=True, keep_trailing_newline=True)
_template = _env.from_string(_SVG_TEMPLATE)


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def value_color(t: float) -> str:
    """Hex color for a normalized feature value in [0, 1]."""
    t = float(np.clip(t, 0.0, 1.0))
    for (t0, c0), (t1, c1) in zip(COLOR_STOPS, COLOR_STOPS[1:]):
        if t <= t1:
            u = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = [round(a + (b - a) * u) for a, b in zip(c0, c1)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*COLOR_STOPS[-1][1])


def row_jitter(row_index: np.ndarray) -> np.ndarray:
    """Uniform [-1, 1) offsets, a splitmix64 hash of the row index."""
    z = np.asarray(row_index, dtype=np.uint64) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    unit = (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return 2.0 * unit - 1.0


def _ticks(limit: float, to_x) -> List[dict]:
    return [{"x": _fmt(to_x(v)), "label": f"{v:.3g}"} for v in np.linspace(-limit, limit, 5)]


def render_swarm_svg(plot_data: pd.DataFrame, title: str = "") -> str:
    """
    One horizontal band per feature in the row order of `plot_data`
    (columns feature, shap_value, normalized_feature_value).
    """
    features = list(dict.fromkeys(plot_data["feature"])) if not plot_data.empty else []
    height = MARGIN_TOP + max(1, len(features)) * BAND_HEIGHT + MARGIN_BOTTOM
    plot_left, plot_top = MARGIN_LEFT, MARGIN_TOP
    plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_bottom = plot_top + max(1, len(features)) * BAND_HEIGHT

    shap = plot_data["shap_value"].to_numpy(dtype=float) if not plot_data.empty else np.zeros(0)
    finite = shap[np.isfinite(shap)]
    limit = float(np.max(np.abs(finite))) * 1.05 if finite.size else 1.0
    limit = limit if limit > 0 else 1.0

    def to_x(v):
        return plot_left + (v + limit) / (2.0 * limit) * plot_width

    bands = []
    if features:
        jitter = row_jitter(np.arange(len(plot_data)))
        for b, feature in enumerate(features):
            top = plot_top + b * BAND_HEIGHT
            center = top + BAND_HEIGHT / 2.0
            rows = np.flatnonzero((plot_data["feature"] == feature).to_numpy())
            points = [
                {
                    "x": _fmt(to_x(shap[j])),
                    "y": _fmt(center + jitter[j] * BAND_HEIGHT * 0.35),
                    "color": value_color(plot_data["normalized_feature_value"].iat[j]),
                }
                for j in rows
                if np.isfinite(shap[j])
            ]
            bands.append({
                "feature": feature,
                "top": _fmt(top),
                "center": _fmt(center),
                "fill": "#f4f6f8" if b % 2 == 0 else "#ffffff",
                "points": points,
            })

    return _template.render(
        width=WIDTH,
        height=height,
        title=title,
        gradient=[{"offset": _fmt(t), "color": value_color(t)} for t, _ in COLOR_STOPS],
        bands=bands,
        band_height=BAND_HEIGHT,
        radius=POINT_RADIUS,
        plot_left=plot_left,
        plot_top=plot_top,
        plot_width=plot_width,
        plot_bottom=plot_bottom,
        zero_x=_fmt(to_x(0.0)),
        ticks=_ticks(limit, to_x),
        legend_x=WIDTH - MARGIN_RIGHT + 30,
        legend_height=min(120, plot_bottom - plot_top),
    )
