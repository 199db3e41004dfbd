"""Budget-constrained informative path planning on spatial graphs."""

__version__ = "0.1.0"

from .graph import (
    GraphLoadError,
    InvalidPathError,
    SpatialGraph,
    build_grid_graph,
    load_graph,
    path_cost,
    sample_points_along_path,
    save_graph,
)
from .gp import (
    FitResult,
    GpModel,
    KernelParams,
    NumericalError,
    PathRewardTracker,
    PilotData,
    differential_entropy,
    fit_hyperparameters,
    incremental_reward,
    kernel,
    log_marginal_likelihood,
    lml_value_and_grad,
    mi_of_locations,
    mi_reward,
    posterior_covariance,
)
from .env import (
    EpisodeState,
    InvalidActionError,
    ProblemInstance,
    Transition,
    explore_action,
    naive_action,
    reset,
    run_exploration_episode,
    step,
    valid_actions,
)
from .fields import corridor_graph, draw_field, synthetic_pilot
from .qlearn import (
    CheckpointError,
    QNetwork,
    ReplayBuffer,
    RolloutResult,
    TrainResult,
    TrainingConfig,
    greedy_rollout,
    load_checkpoint,
    masked_q,
    save_checkpoint,
    td_update,
    train,
)
from .baselines import (
    BruteForceResult,
    GaConfig,
    GaResult,
    GreedyTspResult,
    RgConfig,
    RgResult,
    brute_force,
    genetic,
    greedy_tsp,
    recursive_greedy,
)
from .config import (
    ConfigError,
    ExperimentConfig,
    build_instance,
    build_model,
    load_experiment,
    training_config,
)
from .results import (
    PlanRecord,
    read_records,
    summarize,
    write_records,
    write_summary_csv,
)

__all__ = [
    "__version__",
    # graph
    "GraphLoadError",
    "InvalidPathError",
    "SpatialGraph",
    "build_grid_graph",
    "load_graph",
    "path_cost",
    "sample_points_along_path",
    "save_graph",
    # field model
    "FitResult",
    "GpModel",
    "KernelParams",
    "NumericalError",
    "PathRewardTracker",
    "PilotData",
    "differential_entropy",
    "fit_hyperparameters",
    "incremental_reward",
    "kernel",
    "log_marginal_likelihood",
    "lml_value_and_grad",
    "mi_of_locations",
    "mi_reward",
    "posterior_covariance",
    # environment
    "EpisodeState",
    "InvalidActionError",
    "ProblemInstance",
    "Transition",
    "explore_action",
    "naive_action",
    "reset",
    "run_exploration_episode",
    "step",
    "valid_actions",
    # synthetic worlds
    "corridor_graph",
    "draw_field",
    "synthetic_pilot",
    # learned planner
    "CheckpointError",
    "QNetwork",
    "ReplayBuffer",
    "RolloutResult",
    "TrainResult",
    "TrainingConfig",
    "greedy_rollout",
    "load_checkpoint",
    "masked_q",
    "save_checkpoint",
    "td_update",
    "train",
    # classical planners
    "BruteForceResult",
    "GaConfig",
    "GaResult",
    "GreedyTspResult",
    "RgConfig",
    "RgResult",
    "brute_force",
    "genetic",
    "greedy_tsp",
    "recursive_greedy",
    # experiments
    "ConfigError",
    "ExperimentConfig",
    "build_instance",
    "build_model",
    "load_experiment",
    "training_config",
    "PlanRecord",
    "read_records",
    "summarize",
    "write_records",
    "write_summary_csv",
]
