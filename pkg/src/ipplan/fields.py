"""Synthetic worlds: corridor graphs and fields drawn from a known prior.

Benchmarks need environments whose ground truth is controllable, so this
module builds corridor-style graphs alongside the regular grids from
:mod:`ipplan.graph`, and synthesizes pilot data by sampling the field model
itself under a fixed seed.
"""

from __future__ import annotations

import numpy as np

from .gp import KernelParams, PilotData, _chol_factor, kernel
from .graph import SpatialGraph

__all__ = ["corridor_graph", "draw_field", "synthetic_pilot"]


def _link_lattice(units: list[tuple[int, int]], step: int, scale: float) -> SpatialGraph:
    """Graph over integer lattice points; neighbors sit exactly ``step`` units
    apart axis-aligned.  Adjacency is decided on the integers so float
    rounding can never drop an edge."""
    ids = tuple(range(len(units)))
    pos = np.asarray(units, dtype=float) * scale
    edges = []
    by_unit = {u: i for i, u in enumerate(units)}
    for i, (x, y) in enumerate(units):
        for dx, dy in ((step, 0), (0, step)):
            j = by_unit.get((x + dx, y + dy))
            if j is not None:
                edges.append((min(i, j), max(i, j), float(step * scale)))
    return SpatialGraph(ids, pos, tuple(edges))


def corridor_graph(variant: str = "tee61", spacing: float = 2.0) -> SpatialGraph:
    """Corridor-system graph shaped like a T: a long bar plus a thick stem.

    ``"tee61"`` has 61 vertices (bar of 33 spanning 64 m, stem reaching down
    24 m); ``"corridor60"`` is the same layout with one stem vertex removed.
    Vertex ids run row-major in reading order, all edge costs equal
    ``spacing``.
    """
    units: list[tuple[int, int]] = []
    # bar across the top, drawn on a half-spacing unit lattice
    units += [(x, 24) for x in range(0, 66, 2)]
    # two-wide stem below the bar center, plus a partial third column
    stem_c_span = range(12, 24, 2) if variant == "tee61" else range(14, 24, 2)
    units += [(30, y) for y in stem_c_span]
    units += [(32, y) for y in range(2, 24, 2)]
    units += [(34, y) for y in range(2, 24, 2)]
    if variant not in ("tee61", "corridor60"):
        raise ValueError(f"unknown corridor variant {variant!r}")
    units = sorted(set(units), key=lambda c: (c[1], c[0]))
    return _link_lattice(units, 2, spacing / 2.0)


def draw_field(
    graph: SpatialGraph, params: KernelParams, seed: int = 0, mean: float = 0.0
) -> np.ndarray:
    """One noise-free draw of the latent field at every vertex.

    Ground truth for demos and synthetic benchmarks; the same seed always
    reproduces the same surface.
    """
    rng = np.random.default_rng(seed)
    K = kernel(params, graph.positions, graph.positions)
    L = _chol_factor(K, params.signal_variance)
    return mean + L @ rng.standard_normal(graph.n_vertices)


def synthetic_pilot(
    graph: SpatialGraph,
    params: KernelParams,
    n_points: int,
    seed: int = 0,
    mean: float = 0.0,
) -> PilotData:
    """Pilot survey drawn from the model itself: locations uniform over the
    bounding box, values one joint prior draw plus observation noise."""
    if n_points < 1:
        raise ValueError("n_points must be at least 1")
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = graph.bounding_box()
    locs = rng.uniform([xmin, ymin], [xmax, ymax], size=(n_points, 2))
    K = kernel(params, locs, locs)
    L = _chol_factor(K, params.signal_variance)
    latent = mean + L @ rng.standard_normal(n_points)
    noisy = latent + np.sqrt(params.noise_variance) * rng.standard_normal(n_points)
    return PilotData(locs, noisy)
