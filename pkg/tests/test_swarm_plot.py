# tests/test_swarm_plot.py
import numpy as np
import pandas as pd

from campaign import FEATURES
from swarm_plot import render_swarm_svg, row_jitter, value_color


def plot_frame(features=FEATURES, per_feature=30):
    rng = np.random.default_rng(0)
    rows = [
        {"feature": f, "shap_value": float(v), "normalized_feature_value": float(t)}
        for f in features
        for v, t in zip(rng.normal(size=per_feature), rng.random(per_feature))
    ]
    return pd.DataFrame(rows)


def test_one_band_per_feature():
    svg = render_swarm_svg(plot_frame())
    assert svg.startswith("<svg")
    assert svg.count('<g class="band"') == 7
    assert svg.count("<circle") == 7 * 30
    assert "no data" not in svg


def test_band_order_follows_input_rows():
    svg = render_swarm_svg(plot_frame(features=("w", "c1")))
    assert svg.index('data-feature="w"') < svg.index('data-feature="c1"')


def test_empty_input_renders_axes_and_note():
    svg = render_swarm_svg(pd.DataFrame(columns=["feature", "shap_value", "normalized_feature_value"]))
    assert "no data" in svg
    assert '<g class="band"' not in svg
    assert "SHAP value" in svg


def test_rendering_is_byte_identical():
    assert render_swarm_svg(plot_frame(), "Star f1") == render_swarm_svg(plot_frame(), "Star f1")


def test_title_is_escaped():
    assert "&lt;b&gt;" in render_swarm_svg(plot_frame(), title="<b>")


def test_colors_and_jitter():
    assert value_color(0.0) == "#440154"
    assert value_color(1.0) == "#fde725"
    assert value_color(2.0) == value_color(1.0)
    jitter = row_jitter(np.arange(1000))
    assert np.all((jitter >= -1.0) & (jitter < 1.0))
    assert np.array_equal(jitter, row_jitter(np.arange(1000)))
    assert len(np.unique(jitter)) == 1000
