"""Classical planners for the same budgeted information-gathering problem.

Four solvers share the problem definition with the learned planner and are
scored by the same mutual-information objective:

* exhaustive search over all feasible walks, with shortest-path pruning;
* recursive greedy splitting on a middle vertex and a budget share;
* cost-benefit vertex selection expanded into a walk through shortest paths;
* a genetic algorithm over valid walks.

Every solver returns walks that start at ``v_s``, end at their first arrival
at ``v_t``, and respect the budget, matching the episode semantics of the
learning environment.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .env import COST_TOL, ProblemInstance, run_exploration_episode
from .gp import mi_of_locations, mi_reward
from .graph import path_cost, sample_points_along_path

__all__ = [
    "BruteForceResult",
    "brute_force",
    "RgConfig",
    "RgResult",
    "recursive_greedy",
    "GreedyTspResult",
    "greedy_tsp",
    "GaConfig",
    "GaResult",
    "genetic",
]


# ---- exhaustive search ----


@dataclass(frozen=True)
class BruteForceResult:
    path: list[int] | None
    value: float
    n_paths: int
    complete: bool


def brute_force(
    instance: ProblemInstance,
    time_limit_s: float | None = None,
    max_paths: int | None = None,
    evaluate: bool = True,
) -> BruteForceResult:
    """Enumerate every feasible walk by depth-first search.

    A branch is extended to a neighbor only if the walk can still afford to
    reach the goal afterwards, so every leaf is a feasible walk.  Branches
    stop at the first arrival at ``v_t``.  With ``evaluate=False`` only the
    count is produced.  ``complete`` is False when the time limit or the
    path cap cut the enumeration short.
    """
    g = instance.graph
    apsp = g.apsp()
    t_idx = g.index_of(instance.v_t)
    t0 = time.perf_counter()
    best_path: list[int] | None = None
    best_value = -np.inf
    n_paths = 0
    truncated = False
    path = [instance.v_s]

    def visit(u: int, remaining: float) -> bool:
        nonlocal best_path, best_value, n_paths, truncated
        if truncated:
            return False
        if time_limit_s is not None and n_paths % 64 == 0:
            if time.perf_counter() - t0 > time_limit_s:
                truncated = True
                return False
        for x in g.neighbors(u):
            c = g.edge_cost(u, x)
            if c + apsp[g.index_of(x)][t_idx] > remaining + COST_TOL:
                continue
            path.append(x)
            if x == instance.v_t:
                n_paths += 1
                if evaluate:
                    value = mi_reward(instance.model, path, instance.sample_interval)
                    if value > best_value:
                        best_value = value
                        best_path = list(path)
                if max_paths is not None and n_paths >= max_paths:
                    truncated = True
            else:
                visit(x, remaining - c)
            path.pop()
            if truncated:
                return False
        return True

    visit(instance.v_s, instance.budget)
    if best_path is None:
        best_value = 0.0
    return BruteForceResult(best_path, best_value, n_paths, not truncated)


# ---- recursive greedy ----


@dataclass(frozen=True)
class RgConfig:
    depth: int = 2
    budget_step: float | None = None  # default: the cheapest edge in the graph


@dataclass(frozen=True)
class RgResult:
    path: list[int] | None
    value: float
    n_oracle_calls: int


def recursive_greedy(instance: ProblemInstance, config: RgConfig = RgConfig()) -> RgResult:
    """Recursive greedy over middle vertices and budget splits.

    Depth zero commits to the shortest route.  At depth ``i`` the walk is
    split at every affordable middle vertex and every budget share on a grid
    of ``budget_step``; the first half is planned, its samples committed, and
    the second half planned conditioned on them.  The depth-``i-1`` candidate
    is always kept in the running, so the result never degrades as depth
    grows.  ``n_oracle_calls`` counts objective evaluations, the standard
    cost measure for this planner.
    """
    g = instance.graph
    model = instance.model
    apsp = g.apsp()
    d = instance.sample_interval
    step = config.budget_step if config.budget_step is not None else instance.min_edge_cost
    if step <= 0:
        raise ValueError("budget_step must be positive")
    calls = 0

    def oracle(locations: np.ndarray) -> float:
        nonlocal calls
        calls += 1
        return mi_of_locations(model, locations)

    def plan(s: int, t: int, b: float, committed: np.ndarray, depth: int):
        dist_st = apsp[g.index_of(s)][g.index_of(t)]
        if dist_st > b + COST_TOL:
            return None, -np.inf
        mi_base = oracle(committed)

        def marginal(walk: list[int]) -> float:
            samples = sample_points_along_path(g, walk, d)
            return oracle(np.vstack([committed, samples])) - mi_base

        base = g.shortest_path_route(s, t)
        best_walk, best_val = base, marginal(base)
        if depth == 0:
            return best_walk, best_val
        for m in g.ids:
            lo = apsp[g.index_of(s)][g.index_of(m)]
            hi = b - apsp[g.index_of(m)][g.index_of(t)]
            if lo > hi + COST_TOL:
                continue
            shares = {lo, hi}
            k = np.ceil(lo / step - COST_TOL)
            while k * step <= hi + COST_TOL:
                shares.add(k * step)
                k += 1
            for b1 in sorted(shares):
                first, _ = plan(s, m, b1, committed, depth - 1)
                if first is None:
                    continue
                first_samples = sample_points_along_path(g, first, d)
                # leftover budget from the first half carries over
                second, _ = plan(
                    m, t, b - path_cost_or_zero(g, first),
                    np.vstack([committed, first_samples]), depth - 1,
                )
                if second is None:
                    continue
                walk = first + second[1:]
                if path_cost_or_zero(g, walk) > b + COST_TOL:
                    continue
                val = marginal(walk)
                if val > best_val:
                    best_walk, best_val = walk, val
        return best_walk, best_val

    pilot = model.pilot.locations if model.pilot is not None else np.zeros((0, 2))
    walk, val = plan(instance.v_s, instance.v_t, instance.budget, pilot, config.depth)
    if walk is None:
        return RgResult(None, 0.0, calls)
    return RgResult(walk, mi_reward(model, walk, d), calls)


def path_cost_or_zero(g, walk: list[int]) -> float:
    return 0.0 if len(walk) < 2 else path_cost(g, walk)


# ---- cost-benefit selection with tour expansion ----


@dataclass(frozen=True)
class GreedyTspResult:
    path: list[int]
    value: float
    selected: list[int]


def _two_opt(order: list[int], dist) -> list[int]:
    """2-opt on the visiting order, endpoints pinned; dist is a lookup."""
    best = list(order)
    improved = True
    passes = 0
    while improved and passes < 50:
        improved = False
        passes += 1
        for i in range(1, len(best) - 2):
            for j in range(i + 1, len(best) - 1):
                delta = (
                    dist(best[i - 1], best[j])
                    + dist(best[i], best[j + 1])
                    - dist(best[i - 1], best[i])
                    - dist(best[j], best[j + 1])
                )
                if delta < -COST_TOL:
                    best[i : j + 1] = reversed(best[i : j + 1])
                    improved = True
    return best


def greedy_tsp(instance: ProblemInstance) -> GreedyTspResult:
    """Pick vertices by marginal information per marginal travel cost, then
    route through them with shortest paths.

    Selection scores use the vertex positions as stand-in observations; the
    returned value is the exact objective of the expanded walk.  Insertion
    cost is measured on the metric closure, which the expansion realizes
    exactly, so the budget check is exact too.
    """
    g = instance.graph
    model = instance.model
    apsp = g.apsp()

    def dist(u, v):
        return apsp[g.index_of(u)][g.index_of(v)]

    order = [instance.v_s, instance.v_t]
    selected: list[int] = []

    def order_cost(o):
        return sum(dist(a, b) for a, b in zip(o, o[1:]))

    def locs(vertices):
        if not vertices:
            return np.zeros((0, 2))
        return np.asarray([g.position(v) for v in vertices])

    current_mi = mi_of_locations(model, locs(order))
    while True:
        best = None  # (score, vertex, position, new_cost, new_mi)
        base_cost = order_cost(order)
        for v in g.ids:
            if v in order or v in selected:
                continue
            ins_cost, ins_pos = min(
                (dist(order[i], v) + dist(v, order[i + 1]) - dist(order[i], order[i + 1]), i + 1)
                for i in range(len(order) - 1)
            )
            if base_cost + ins_cost > instance.budget + COST_TOL:
                continue
            gain = mi_of_locations(model, locs(order + [v])) - current_mi
            score = gain / ins_cost if ins_cost > COST_TOL else np.inf
            if best is None or score > best[0]:
                best = (score, v, ins_pos, base_cost + ins_cost)
        if best is None:
            break
        _, v, pos, _ = best
        order.insert(pos, v)
        selected.append(v)
        current_mi = mi_of_locations(model, locs(order))

    order = _two_opt(order, dist)
    walk = [instance.v_s]
    for a, b in zip(order, order[1:]):
        walk.extend(g.shortest_path_route(a, b)[1:])
    if len(walk) > 1 and path_cost(g, walk) > instance.budget + COST_TOL:
        raise RuntimeError("expanded walk exceeded the budget")  # unreachable
    return GreedyTspResult(walk, mi_reward(model, walk, instance.sample_interval), selected)


# ---- genetic algorithm ----


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 100
    generations: int = 50
    crossover_prob: float = 0.9
    mutation_prob: float = 0.3
    tournament_size: int = 2
    n_elites: int = 1
    seed: int = 0


@dataclass(frozen=True)
class GaResult:
    path: list[int]
    value: float
    best_history: list[float]


def _regrow(instance: ProblemInstance, prefix: list[int], rng) -> list[int]:
    """Extend a feasible prefix to the goal by uniform choice among actions
    that keep the goal affordable.  Budget strictly shrinks each step, so the
    walk is eventually forced onto a shortest route and terminates."""
    g = instance.graph
    apsp = g.apsp()
    t_idx = g.index_of(instance.v_t)
    walk = list(prefix)
    remaining = instance.budget - path_cost_or_zero(g, walk)
    while walk[-1] != instance.v_t or (len(walk) == 1 and instance.v_s == instance.v_t):
        u = walk[-1]
        options = [
            x
            for x in g.neighbors(u)
            if g.edge_cost(u, x) + apsp[g.index_of(x)][t_idx] <= remaining + COST_TOL
        ]
        if not options:
            raise RuntimeError("no affordable continuation")  # unreachable
        x = options[rng.integers(len(options))]
        remaining -= g.edge_cost(u, x)
        walk.append(x)
    return walk


def _repair(instance: ProblemInstance, walk: list[int]) -> list[int]:
    """Truncate an over-budget walk to its longest prefix that can still
    afford the goal, then append the shortest route home."""
    g = instance.graph
    apsp = g.apsp()
    t_idx = g.index_of(instance.v_t)
    spent = 0.0
    keep = 1
    for i in range(1, len(walk)):
        c = g.edge_cost(walk[i - 1], walk[i])
        if spent + c + apsp[g.index_of(walk[i])][t_idx] > instance.budget + COST_TOL:
            break
        spent += c
        keep = i + 1
    prefix = walk[:keep]
    if prefix[-1] == instance.v_t and len(prefix) > 1:
        return prefix
    return prefix + g.shortest_path_route(prefix[-1], instance.v_t)[1:]


def _crossover(instance: ProblemInstance, p1: list[int], p2: list[int], rng) -> list[int]:
    shared = sorted(set(p1[1:-1]) & set(p2[1:-1]))
    if not shared:
        return list(p1)
    v = shared[rng.integers(len(shared))]
    child = p1[: p1.index(v) + 1] + p2[p2.index(v) + 1 :]
    if path_cost_or_zero(instance.graph, child) > instance.budget + COST_TOL:
        child = _repair(instance, child)
    return child


def _mutate(instance: ProblemInstance, walk: list[int], rng) -> list[int]:
    if len(walk) < 2:
        return list(walk)
    k = int(rng.integers(1, len(walk)))
    return _regrow(instance, walk[:k], rng)


def genetic(instance: ProblemInstance, config: GaConfig = GaConfig()) -> GaResult:
    """Evolve a population of feasible walks; crossover splices two parents
    at a shared vertex, mutation regrows a random suffix.  Offspring are
    repaired rather than discarded, so the population is valid throughout.
    """
    rng = np.random.default_rng(config.seed)
    model = instance.model
    d = instance.sample_interval

    def fitness(walk):
        return mi_reward(model, walk, d)

    pop = []
    for _ in range(config.population_size):
        ep, _ = run_exploration_episode(instance, rng)
        pop.append((list(ep.path), ep.mi_value))

    def tournament():
        picks = rng.integers(len(pop), size=config.tournament_size)
        return max((pop[i] for i in picks), key=lambda pf: pf[1])

    history = [max(f for _, f in pop)]
    for _ in range(config.generations):
        ranked = sorted(pop, key=lambda pf: pf[1], reverse=True)
        nxt = [(list(p), f) for p, f in ranked[: config.n_elites]]
        while len(nxt) < config.population_size:
            parent, pf = tournament()
            if rng.random() < config.crossover_prob:
                other, _ = tournament()
                child = _crossover(instance, parent, other, rng)
            else:
                child = list(parent)
            mutated = False
            if rng.random() < config.mutation_prob:
                child = _mutate(instance, child, rng)
                mutated = True
            if child == parent and not mutated:
                nxt.append((child, pf))  # unchanged clone keeps its fitness
            else:
                nxt.append((child, fitness(child)))
        pop = nxt
        history.append(max(f for _, f in pop))

    best_walk, best_val = max(pop, key=lambda pf: pf[1])
    return GaResult(best_walk, best_val, history)
