import numpy as np
import pytest

from ipplan.gp import GpModel, KernelParams, PilotData
from ipplan.graph import SpatialGraph, build_grid_graph


@pytest.fixture
def grid3() -> SpatialGraph:
    return build_grid_graph(2, 2, 1)


@pytest.fixture
def line3() -> SpatialGraph:
    return SpatialGraph(
        (0, 1, 2),
        np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]),
        ((0, 1, 1.0), (1, 2, 1.0)),
    )


def make_pilot(rng: np.random.Generator, n: int, span: float = 2.0) -> PilotData:
    return PilotData(rng.uniform(0.0, span, size=(n, 2)), rng.normal(size=n))


def make_model(
    graph: SpatialGraph,
    rng: np.random.Generator | None = None,
    n_pilot: int = 4,
    signal_variance: float = 1.0,
    lengthscale: float = 0.8,
    noise_variance: float = 0.05,
) -> GpModel:
    rng = rng if rng is not None else np.random.default_rng(0)
    xmin, ymin, xmax, ymax = graph.bounding_box()
    locs = np.column_stack(
        [rng.uniform(xmin, max(xmax, xmin + 1e-6), n_pilot),
         rng.uniform(ymin, max(ymax, ymin + 1e-6), n_pilot)]
    )
    pilot = PilotData(locs, rng.normal(size=n_pilot))
    params = KernelParams(signal_variance, lengthscale, noise_variance)
    return GpModel(graph, params, pilot)
