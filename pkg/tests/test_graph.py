"""Graph construction, file IO, walk costs and arc-length sampling.

Shortest-path distances are cross-checked against a plain Bellman-Ford
relaxation, walk costs against compensated summation, and path sampling
against an independent per-axis interpolation over cumulative arc length.
"""

import math

import numpy as np
import pytest

from ipplan.fields import corridor_graph
from ipplan.graph import (
    GraphLoadError,
    InvalidPathError,
    SpatialGraph,
    build_grid_graph,
    load_graph,
    path_cost,
    sample_points_along_path,
    save_graph,
)

# ---- oracles ----


def bellman_ford(g: SpatialGraph, src: int) -> dict[int, float]:
    """Textbook edge-relaxation shortest paths, independent of scipy."""
    dist = {v: math.inf for v in g.ids}
    dist[src] = 0.0
    for _ in range(g.n_vertices - 1):
        changed = False
        for u, v, c in g.edges:
            if dist[u] + c < dist[v]:
                dist[v] = dist[u] + c
                changed = True
            if dist[v] + c < dist[u]:
                dist[u] = dist[v] + c
                changed = True
        if not changed:
            break
    return dist


def interp_along_polyline(points: np.ndarray, arcs: np.ndarray) -> np.ndarray:
    """Per-axis linear interpolation over cumulative arc length."""
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return np.column_stack(
        [np.interp(arcs, cum, points[:, 0]), np.interp(arcs, cum, points[:, 1])]
    )


def random_walk(g: SpatialGraph, rng: np.random.Generator, steps: int) -> list[int]:
    path = [int(rng.choice(g.ids))]
    for _ in range(steps):
        path.append(int(rng.choice(g.neighbors(path[-1]))))
    return path


# ---- grid construction ----


def test_grid_2x2_unit():
    g = build_grid_graph(2, 2, 1)
    assert g.n_vertices == 9
    assert len(g.edges) == 12
    assert g.shortest_path_cost(0, 8) == 4.0


def test_grid_area_scale():
    # 12 m x 13 m at 3 m spacing: 5 columns x 5 rows
    g = build_grid_graph(12, 13, 3)
    assert g.n_vertices == 25
    assert g.bounding_box() == (0.0, 0.0, 12.0, 12.0)
    assert all(c == 3.0 for _, _, c in g.edges)


def test_grid_non_divisible_spacing():
    g = build_grid_graph(10, 10, 2)
    assert g.n_vertices == 36


def test_grid_apsp_matches_bellman_ford():
    g = build_grid_graph(10, 10, 2)
    for src in (0, 7, 35):
        ref = bellman_ford(g, src)
        for v in g.ids:
            assert g.shortest_path_cost(src, v) == pytest.approx(ref[v], abs=1e-9)


def test_grid_rejects_bad_arguments():
    with pytest.raises(GraphLoadError):
        build_grid_graph(0, 5, 1)
    with pytest.raises(GraphLoadError):
        build_grid_graph(5, 5, -1)


# ---- file format ----


def test_load_save_round_trip(tmp_path):
    g = build_grid_graph(4, 3, 1)
    f = tmp_path / "grid.graph"
    save_graph(g, f)
    h = load_graph(f)
    assert h.ids == g.ids
    assert np.array_equal(h.positions, g.positions)
    assert sorted(h.edges) == sorted(g.edges)
    assert h.fingerprint() == g.fingerprint()


def test_load_corridor_fixture(tmp_path):
    f = tmp_path / "corridor.graph"
    save_graph(corridor_graph("tee61"), f)
    g = load_graph(f)
    assert g.n_vertices == 61


def test_load_singleton(tmp_path):
    f = tmp_path / "one.graph"
    f.write_text("# lonely vertex\nV 0 1.5 2.5\n")
    g = load_graph(f)
    assert g.n_vertices == 1
    assert g.shortest_path_cost(0, 0) == 0.0
    assert g.apsp().shape == (1, 1)


@pytest.mark.parametrize(
    "body, fragment",
    [
        ("V 0 0 0\nV 1 1 0\nE 0 1 -1\n", "positive"),
        ("V 0 0 0\nV 1 1 0\nE 0 1 one\n", "parse"),
        ("V 0 0 0\nV 0 1 0\n", "duplicate vertex"),
        ("V 0 0 0\nV 1 1 0\nE 0 2 1\n", "unknown vertex"),
        ("V 0 0 0\nV 1 1 0\nE 0 1 1\nE 1 0 1\n", "duplicate edge"),
        ("V 0 0 0\nE 0 0 1\n", "self-loop"),
        ("V 0 0 0\nW 1 1 0\n", "unknown record"),
        ("V 0 0\n", "vertex line"),
        ("", "no vertices"),
    ],
)
def test_load_rejects_malformed(tmp_path, body, fragment):
    f = tmp_path / "bad.graph"
    f.write_text(body)
    with pytest.raises(GraphLoadError) as err:
        load_graph(f)
    assert fragment in str(err.value)


def test_load_error_names_offending_line(tmp_path):
    f = tmp_path / "bad.graph"
    f.write_text("V 0 0 0\nV 1 1 0\nE 0 1 -2.5\n")
    with pytest.raises(GraphLoadError) as err:
        load_graph(f)
    assert ":3" in str(err.value)


def test_load_rejects_disconnected(tmp_path):
    f = tmp_path / "split.graph"
    f.write_text("V 0 0 0\nV 1 1 0\nV 2 5 5\nE 0 1 1\n")
    with pytest.raises(GraphLoadError, match="connected"):
        load_graph(f)


# ---- walk costs ----


def test_path_cost_single_vertex():
    g = build_grid_graph(2, 2, 1)
    assert path_cost(g, [4]) == 0.0


def test_path_cost_straight_line():
    g = build_grid_graph(2, 2, 1)
    assert path_cost(g, [0, 1, 2]) == 2.0


def test_path_cost_matches_summation_oracle():
    g = build_grid_graph(6, 6, 1.5)
    rng = np.random.default_rng(7)
    for _ in range(25):
        walk = random_walk(g, rng, 20)
        ref = math.fsum(g.edge_cost(a, b) for a, b in zip(walk, walk[1:]))
        assert path_cost(g, walk) == pytest.approx(ref, rel=1e-12)


def test_path_cost_rejects_non_adjacent():
    g = build_grid_graph(2, 2, 1)
    with pytest.raises(InvalidPathError) as err:
        path_cost(g, [0, 8])
    assert "0" in str(err.value) and "8" in str(err.value)
    with pytest.raises(InvalidPathError):
        path_cost(g, [])


# ---- arc-length sampling ----


def test_sample_count_exact_multiple():
    g = build_grid_graph(4, 1, 1)
    pts = sample_points_along_path(g, [0, 1, 2, 3, 4], 1.0)
    assert pts.shape == (5, 2)
    assert np.allclose(pts[:, 0], [0, 1, 2, 3, 4])


def test_sample_count_floor_rule():
    # length 3.5 at d=1: samples at 0, 1, 2, 3 only
    g = SpatialGraph(
        (0, 1), np.array([[0.0, 0.0], [3.5, 0.0]]), ((0, 1, 3.5),)
    )
    pts = sample_points_along_path(g, [0, 1], 1.0)
    assert pts.shape == (4, 2)


def test_sample_l_shape_matches_interpolation_oracle():
    g = build_grid_graph(2, 2, 1)
    walk = [0, 1, 2, 5, 8]  # east then north, length 4
    pts = sample_points_along_path(g, walk, 0.5)
    corners = np.asarray([g.position(v) for v in walk])
    ref = interp_along_polyline(corners, np.arange(9) * 0.5)
    assert pts.shape == ref.shape
    assert np.max(np.abs(pts - ref)) <= 1e-9


def test_sample_count_property_random_walks():
    g = build_grid_graph(5, 5, 1)
    rng = np.random.default_rng(11)
    for d in (0.3, 0.5, 1.0, 1.7):
        for _ in range(10):
            walk = random_walk(g, rng, int(rng.integers(1, 15)))
            total = path_cost(g, walk)
            pts = sample_points_along_path(g, walk, d)
            assert len(pts) == math.floor(total / d + 1e-9) + 1


def test_sample_single_vertex_path():
    g = build_grid_graph(2, 2, 1)
    pts = sample_points_along_path(g, [4], 1.0)
    assert pts.shape == (1, 2)
    assert np.array_equal(pts[0], g.position(4))


def test_sample_rejects_bad_interval():
    g = build_grid_graph(2, 2, 1)
    with pytest.raises(InvalidPathError):
        sample_points_along_path(g, [0, 1], 0.0)


# ---- shortest paths ----


def test_shortest_path_identity_and_adjacent():
    g = build_grid_graph(3, 3, 1)
    assert g.shortest_path_cost(5, 5) == 0.0
    assert g.shortest_path_cost(0, 1) == 1.0


def holed_grid() -> SpatialGraph:
    base = build_grid_graph(5, 5, 1)
    holes = {8, 14, 21}
    ids = tuple(v for v in base.ids if v not in holes)
    pos = np.asarray([base.position(v) for v in ids])
    edges = tuple(e for e in base.edges if e[0] not in holes and e[1] not in holes)
    return SpatialGraph(ids, pos, edges)


def test_holed_grid_apsp_matches_bellman_ford():
    g = holed_grid()
    for src in g.ids:
        ref = bellman_ford(g, src)
        for v in g.ids:
            assert g.shortest_path_cost(src, v) == pytest.approx(ref[v], abs=1e-9)


def test_shortest_path_route_is_consistent():
    g = holed_grid()
    rng = np.random.default_rng(3)
    for _ in range(30):
        u, v = rng.choice(g.ids, size=2)
        route = g.shortest_path_route(int(u), int(v))
        assert route[0] == u and route[-1] == v
        assert path_cost(g, route) == pytest.approx(
            g.shortest_path_cost(int(u), int(v)), abs=1e-9
        )


def test_apsp_invariants():
    g = holed_grid()
    d = g.apsp()
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0.0)
    for u, v, c in g.edges:
        iu, iv = g.index_of(u), g.index_of(v)
        assert d[iu, iv] <= c
    n = g.n_vertices
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert d[i, j] <= d[i, k] + d[k, j] + 1e-12


def test_unknown_vertex_queries_raise():
    g = build_grid_graph(2, 2, 1)
    with pytest.raises(InvalidPathError):
        g.shortest_path_cost(0, 99)
    with pytest.raises(InvalidPathError):
        g.neighbors(-1)
