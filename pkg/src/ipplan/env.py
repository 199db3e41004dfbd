"""Sequential decision process for budget-constrained path planning.

An episode starts at ``v_s`` with the full budget and extends the walk one
adjacent vertex at a time.  An action is valid when, after paying its edge
cost, the cheapest route to ``v_t`` still fits in the remaining budget; this
one-step lookahead is what lets guided exploration guarantee termination at
``v_t``.  Greedy policies may still pick invalid actions, in which case the
episode ends immediately with a penalty that cancels the reward accumulated
so far, leaving the partial path untouched.

Step rewards are marginal mutual-information gains, so they telescope: their
sum over an episode equals the reward of the final walk minus the reward of
the bare start vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gp import GpModel, PathRewardTracker
from .graph import SpatialGraph

__all__ = [
    "InvalidActionError",
    "EpisodeDoneError",
    "ProblemInstance",
    "EpisodeState",
    "Transition",
    "reset",
    "actions",
    "valid_actions",
    "explore_action",
    "naive_action",
    "step",
    "run_exploration_episode",
]

COST_TOL = 1e-9  # slack for exact-boundary budget comparisons


class InvalidActionError(ValueError):
    """Action not applicable in the current state (not a neighbor, no choices)."""


class EpisodeDoneError(RuntimeError):
    """The episode has already terminated."""


@dataclass(frozen=True)
class ProblemInstance:
    """A planning task: graph, field model, endpoints, budget, sample spacing."""

    graph: SpatialGraph
    model: GpModel
    v_s: int
    v_t: int
    budget: float
    sample_interval: float = 1.0

    def __post_init__(self):
        g = self.graph
        g.index_of(self.v_s)
        g.index_of(self.v_t)
        if self.model.graph.fingerprint() != g.fingerprint():
            raise ValueError("model was built for a different graph")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        shortest = g.shortest_path_cost(self.v_s, self.v_t)
        if self.budget < shortest - COST_TOL:
            raise ValueError(
                f"budget {self.budget} cannot reach v_t: shortest path costs {shortest}"
            )

    @property
    def min_edge_cost(self) -> float:
        return min(c for _, _, c in self.graph.edges) if self.graph.edges else 1.0

    @property
    def step_cap(self) -> int:
        """Hard per-episode step limit: 4 * ceil(budget / cheapest edge)."""
        return 4 * max(int(math.ceil(self.budget / self.min_edge_cost)), 1)


@dataclass
class EpisodeState:
    """Mutable episode state: partial walk, remaining budget, reward so far.

    ``mi_value`` is the reward of the current partial walk and
    ``initial_value`` the reward of the bare start vertex, so
    ``cumulative_reward == mi_value - initial_value`` while the episode is
    live.
    """

    path: list[int]
    remaining_budget: float
    cumulative_reward: float
    done: bool
    mi_value: float
    initial_value: float
    _tracker: PathRewardTracker = field(repr=False)

    @property
    def current_vertex(self) -> int:
        return self.path[-1]


@dataclass(frozen=True)
class Transition:
    """One step's experience, with path snapshots as states."""

    state: tuple[int, ...]
    action: int
    reward: float
    next_state: tuple[int, ...]
    is_done: bool


def reset(instance: ProblemInstance) -> EpisodeState:
    """Fresh episode at ``v_s`` with the full budget."""
    tracker = instance.model.path_tracker(instance.sample_interval)
    f0 = tracker.reset(instance.v_s)
    return EpisodeState(
        path=[instance.v_s],
        remaining_budget=float(instance.budget),
        cumulative_reward=0.0,
        done=False,
        mi_value=f0,
        initial_value=f0,
        _tracker=tracker,
    )


def actions(instance: ProblemInstance, state: EpisodeState) -> tuple[int, ...]:
    """All neighbors of the current vertex (valid or not)."""
    if state.done:
        raise EpisodeDoneError("episode is over; no actions available")
    return instance.graph.neighbors(state.current_vertex)


def valid_actions(instance: ProblemInstance, state: EpisodeState) -> tuple[int, ...]:
    """Neighbors whose edge cost plus the cheapest route onward fits the budget."""
    g = instance.graph
    here = state.current_vertex
    out = []
    for x in actions(instance, state):
        c = g.edge_cost(here, x)
        if c + g.shortest_path_cost(x, instance.v_t) <= state.remaining_budget + COST_TOL:
            out.append(x)
    return tuple(out)


def explore_action(
    instance: ProblemInstance, state: EpisodeState, rng: np.random.Generator
) -> int:
    """Guided exploration: uniform over unvisited valid actions, falling back
    to uniform over all valid actions when every candidate was already visited.

    "Visited" means appearing anywhere in the partial walk.  Raises
    :class:`InvalidActionError` if no action is valid (possible only for a
    tour whose budget cannot cover any round trip).
    """
    valid = valid_actions(instance, state)
    if not valid:
        raise InvalidActionError(
            f"no valid action at vertex {state.current_vertex} "
            f"with budget {state.remaining_budget:.3f}"
        )
    seen = set(state.path)
    unvisited = tuple(x for x in valid if x not in seen)
    pool = unvisited if unvisited else valid
    return int(pool[rng.integers(len(pool))])


def naive_action(
    instance: ProblemInstance, state: EpisodeState, rng: np.random.Generator
) -> int:
    """Unguided ablation: uniform over all neighbors, budget ignored."""
    pool = actions(instance, state)
    return int(pool[rng.integers(len(pool))])


def step(instance: ProblemInstance, state: EpisodeState, action: int) -> Transition:
    """Advance the episode by one action, mutating ``state``.

    A feasible action is appended to the walk and rewarded with its marginal
    MI gain; reaching ``v_t`` terminates.  An infeasible action terminates
    immediately with reward ``-cumulative_reward`` and leaves the walk and
    budget unchanged.
    """
    if state.done:
        raise EpisodeDoneError("episode is over")
    g = instance.graph
    here = state.current_vertex
    if action not in g.neighbors(here):
        raise InvalidActionError(f"vertex {action} is not adjacent to {here}")
    before = tuple(state.path)
    c = g.edge_cost(here, action)
    onward = g.shortest_path_cost(action, instance.v_t)
    if c + onward <= state.remaining_budget + COST_TOL:
        f_new = state._tracker.extend(action)
        r = f_new - state.mi_value
        state.mi_value = f_new
        state.path.append(action)
        state.remaining_budget = max(state.remaining_budget - c, 0.0)
        state.cumulative_reward += r
        state.done = action == instance.v_t
        return Transition(before, action, r, tuple(state.path), state.done)
    r = -state.cumulative_reward
    state.done = True
    return Transition(before, action, r, before, True)


def run_exploration_episode(
    instance: ProblemInstance, rng: np.random.Generator
) -> tuple[EpisodeState, list[Transition]]:
    """Roll out one episode driven entirely by :func:`explore_action`."""
    state = reset(instance)
    transitions: list[Transition] = []
    for _ in range(instance.step_cap):
        if state.done:
            break
        a = explore_action(instance, state, rng)
        transitions.append(step(instance, state, a))
    return state, transitions
