"""YAML experiment descriptions and the factories that realize them.

An experiment file names a graph, a kernel, a pilot source, the planning
instance, and optional solver/training knobs:

.. code-block:: yaml

    name: corridor-demo
    graph: {kind: corridor, variant: tee61, spacing: 2.0}
    kernel: {signal_variance: 1.0, lengthscale: 6.0, noise_variance: 0.05}
    pilot: {kind: synthetic, n_points: 30, seed: 7}
    instance: {v_s: 0, v_t: 60, budget: 90.0, sample_interval: 2.0}
    fit: {enabled: true, n_starts: 5, seed: 0}
    training: {episodes: 2000, hidden_size: 64}
    solvers:
      ga: {population_size: 100, generations: 50}

``graph.kind`` is one of ``grid``, ``corridor``, ``file``; ``pilot.kind``
one of ``synthetic``, ``csv``, ``none``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .env import ProblemInstance
from .fields import corridor_graph, synthetic_pilot
from .gp import FitResult, GpModel, KernelParams, PilotData, fit_hyperparameters
from .graph import SpatialGraph, build_grid_graph, load_graph
from .qlearn import TrainingConfig

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "load_experiment",
    "parse_experiment",
    "build_graph",
    "build_model",
    "build_instance",
    "training_config",
]


class ConfigError(ValueError):
    """An experiment file is missing something or names an unknown option."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    graph: dict
    kernel: dict
    instance: dict
    pilot: dict = field(default_factory=lambda: {"kind": "none"})
    fit: dict = field(default_factory=dict)
    training: dict = field(default_factory=dict)
    solvers: dict = field(default_factory=dict)


def parse_experiment(raw: dict, source: str = "<config>") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: expected a mapping at the top level")
    for key in ("name", "graph", "kernel", "instance"):
        if key not in raw:
            raise ConfigError(f"{source}: missing required section {key!r}")
    known = {"name", "graph", "kernel", "instance", "pilot", "fit", "training", "solvers"}
    stray = sorted(set(raw) - known)
    if stray:
        raise ConfigError(f"{source}: unknown sections {stray}")
    return ExperimentConfig(
        name=str(raw["name"]),
        graph=dict(raw["graph"]),
        kernel=dict(raw["kernel"]),
        instance=dict(raw["instance"]),
        pilot=dict(raw.get("pilot", {"kind": "none"})),
        fit=dict(raw.get("fit", {})),
        training=dict(raw.get("training", {})),
        solvers=dict(raw.get("solvers", {})),
    )


def load_experiment(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return parse_experiment(raw, source=str(path))


def build_graph(cfg: ExperimentConfig) -> SpatialGraph:
    g = cfg.graph
    kind = g.get("kind")
    try:
        if kind == "grid":
            return build_grid_graph(g["width_m"], g["height_m"], g["spacing"])
        if kind == "corridor":
            return corridor_graph(g.get("variant", "tee61"), g.get("spacing", 2.0))
        if kind == "file":
            return load_graph(g["path"])
    except KeyError as e:
        raise ConfigError(f"graph section is missing {e}") from e
    raise ConfigError(f"unknown graph kind {kind!r}")


def _kernel_params(cfg: ExperimentConfig) -> KernelParams:
    k = cfg.kernel
    try:
        return KernelParams(
            k["signal_variance"], k["lengthscale"], k["noise_variance"]
        )
    except KeyError as e:
        raise ConfigError(f"kernel section is missing {e}") from e


def _build_pilot(cfg: ExperimentConfig, graph: SpatialGraph, params: KernelParams):
    p = cfg.pilot
    kind = p.get("kind", "none")
    if kind == "none":
        return None
    if kind == "csv":
        return PilotData.from_csv(p["path"])
    if kind == "synthetic":
        return synthetic_pilot(
            graph,
            params,
            int(p.get("n_points", 20)),
            seed=int(p.get("seed", 0)),
            mean=float(p.get("mean", 0.0)),
        )
    raise ConfigError(f"unknown pilot kind {kind!r}")


def build_model(cfg: ExperimentConfig, graph: SpatialGraph | None = None):
    """Graph + pilot + (optionally fitted) kernel -> model.

    Returns ``(model, fit_result)``; ``fit_result`` is None when fitting is
    disabled or there is no pilot to fit to.
    """
    graph = graph if graph is not None else build_graph(cfg)
    params = _kernel_params(cfg)
    pilot = _build_pilot(cfg, graph, params)
    fit_res: FitResult | None = None
    if cfg.fit.get("enabled", False) and pilot is not None:
        fit_res = fit_hyperparameters(
            pilot,
            params,
            n_starts=int(cfg.fit.get("n_starts", 5)),
            seed=int(cfg.fit.get("seed", 0)),
        )
        params = fit_res.params
    return GpModel(graph, params, pilot), fit_res


def build_instance(cfg: ExperimentConfig):
    """Realize the full planning problem; returns (instance, fit_result)."""
    graph = build_graph(cfg)
    model, fit_res = build_model(cfg, graph)
    inst = cfg.instance
    try:
        instance = ProblemInstance(
            graph,
            model,
            int(inst["v_s"]),
            int(inst["v_t"]),
            float(inst["budget"]),
            sample_interval=float(inst.get("sample_interval", 1.0)),
        )
    except KeyError as e:
        raise ConfigError(f"instance section is missing {e}") from e
    return instance, fit_res


def training_config(cfg: ExperimentConfig, **overrides) -> TrainingConfig:
    """Training knobs from the experiment file, overridable per call."""
    merged = dict(cfg.training)
    merged.update(overrides)
    try:
        return TrainingConfig(**merged)
    except TypeError as e:
        raise ConfigError(f"bad training option: {e}") from e
