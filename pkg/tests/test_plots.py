"""SVG scene graph and the plot builders."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ipplan.fields import synthetic_pilot
from ipplan.gp import GpModel, KernelParams
from ipplan.graph import build_grid_graph
from ipplan.plots import (
    Circle,
    Line,
    Polygon,
    Polyline,
    Scene,
    Text,
    _ticks,
    colormap,
    path_overlay_scene,
    reward_curves_scene,
    value_vs_budget_scene,
    write_svg,
)


def parse_svg(markup: str) -> ET.Element:
    return ET.fromstring(markup)


def test_scene_bounds_cover_all_elements():
    s = Scene()
    s.add(Polyline(((0.0, 1.0), (2.0, 5.0))), Circle(-1.0, 3.0), Text(4.0, -2.0, "x"))
    assert s.data_bounds() == (-1.0, -2.0, 4.0, 5.0)


def test_scene_bounds_degenerate_point_padded():
    s = Scene()
    s.add(Circle(2.0, 2.0))
    xmin, ymin, xmax, ymax = s.data_bounds()
    assert xmax > xmin and ymax > ymin


def test_render_is_wellformed_xml_with_y_flip():
    s = Scene(title="demo & more")
    s.add(Circle(0.0, 0.0, fill="#ff0000"), Circle(0.0, 10.0, fill="#00ff00"))
    root = parse_svg(s.render(width=400, height=300))
    assert root.tag.endswith("svg")
    circles = [e for e in root.iter() if e.tag.endswith("circle")]
    assert len(circles) == 2
    low = next(c for c in circles if c.get("fill") == "#ff0000")
    high = next(c for c in circles if c.get("fill") == "#00ff00")
    # larger data y must land at a smaller pixel y
    assert float(high.get("cy")) < float(low.get("cy"))


def test_render_escapes_text():
    s = Scene()
    s.add(Circle(0, 0), Text(0, 0, "a < b & c"))
    markup = s.render()
    assert "a &lt; b &amp; c" in markup
    parse_svg(markup)


def test_render_rejects_foreign_elements():
    s = Scene()
    s.add(object())
    with pytest.raises(TypeError, match="unknown scene element"):
        s.render()


def test_colormap_endpoints_and_format():
    assert colormap(0.0) == "#440154"
    assert colormap(1.0) == "#fde725"
    mid = colormap(0.5)
    assert mid.startswith("#") and len(mid) == 7
    assert colormap(-3.0) == colormap(0.0)
    assert colormap(7.0) == colormap(1.0)


def test_ticks_are_round_and_inside():
    ticks = _ticks(0.0, 10.0)
    assert ticks == [0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
    ticks = _ticks(0.3, 17.2)
    assert all(0.3 <= t <= 17.2 for t in ticks)
    assert 3 <= len(ticks) <= 8
    assert ticks == sorted(ticks)


def test_reward_curves_band_and_mean():
    traces = [[1.0, 2.0, 3.0], [2.0, 3.0, 4.0], [0.0, 1.0, 2.0]]
    scene = reward_curves_scene(traces, epoch_size=10)
    polygons = [e for e in scene.elements if isinstance(e, Polygon)]
    assert len(polygons) == 1
    assert len(polygons[0].points) == 6  # upper edge forward, lower edge back
    main = [e for e in scene.elements if isinstance(e, Polyline)][0]
    assert [y for _, y in main.points] == [1.0, 2.0, 3.0]


def test_reward_curves_single_seed_has_no_band():
    scene = reward_curves_scene([[1.0, 2.0]])
    assert not [e for e in scene.elements if isinstance(e, Polygon)]


def test_reward_curves_best_overlay_in_epoch_units():
    scene = reward_curves_scene(
        [[1.0, 2.0]], best_traces=[[0.5] * 100], epoch_size=50
    )
    overlay = [e for e in scene.elements if isinstance(e, Polyline) and e.dash]
    assert len(overlay) == 1
    xs = [x for x, _ in overlay[0].points]
    assert xs[0] == pytest.approx(1 / 50)
    assert xs[-1] == pytest.approx(2.0)


def test_reward_curves_rejects_empty():
    with pytest.raises(ValueError, match="non-empty"):
        reward_curves_scene([])


def test_value_vs_budget_one_line_per_solver():
    scene = value_vs_budget_scene(
        {"ga": [(10.0, 1.0), (20.0, 2.0)], "rl": [(10.0, 1.5), (20.0, 2.5)]}
    )
    lines = [e for e in scene.elements if isinstance(e, Polyline)]
    assert len(lines) == 2
    markers = [e for e in scene.elements if isinstance(e, Circle)]
    assert len(markers) == 4
    labels = {e.s for e in scene.elements if isinstance(e, Text)}
    assert {"ga", "rl"} <= labels


def test_value_vs_budget_sorts_points():
    scene = value_vs_budget_scene({"ga": [(20.0, 2.0), (10.0, 1.0)]})
    line = [e for e in scene.elements if isinstance(e, Polyline)][0]
    assert [x for x, _ in line.points] == [10.0, 20.0]


def test_value_vs_budget_rejects_empty():
    with pytest.raises(ValueError, match="series"):
        value_vs_budget_scene({})
    with pytest.raises(ValueError, match="empty"):
        value_vs_budget_scene({"ga": []})


def test_path_overlay_counts_match_graph():
    g = build_grid_graph(2, 2, 1.0)
    params = KernelParams(1.0, 0.8, 0.05)
    model = GpModel(g, params, synthetic_pilot(g, params, 5, seed=2))
    path = [0, 1, 2, 5, 8]
    scene = path_overlay_scene(g, model, path)
    lines = [e for e in scene.elements if isinstance(e, Line)]
    assert len(lines) == len(g.edges)
    circles = [e for e in scene.elements if isinstance(e, Circle)]
    # one per vertex plus start and goal markers
    assert len(circles) == g.n_vertices + 2
    walk = [e for e in scene.elements if isinstance(e, Polyline)][0]
    assert len(walk.points) == len(path)
    assert walk.points[0] == tuple(g.position(0))


def test_path_overlay_vertex_shading_varies_with_pilot():
    g = build_grid_graph(3, 3, 1.0)
    params = KernelParams(1.0, 0.8, 0.05)
    model = GpModel(g, params, synthetic_pilot(g, params, 8, seed=0))
    scene = path_overlay_scene(g, model, [0, 1])
    vertex_fills = {
        e.fill for e in scene.elements if isinstance(e, Circle) and e.r_px == 4.0
    }
    assert len(vertex_fills) > 1  # entropy left by the pilot is not uniform


def test_write_svg_produces_parseable_file(tmp_path):
    scene = value_vs_budget_scene({"ga": [(1.0, 1.0), (2.0, 3.0)]})
    out = tmp_path / "fig.svg"
    write_svg(scene, out)
    parse_svg(out.read_text())
