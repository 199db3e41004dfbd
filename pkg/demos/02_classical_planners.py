"""Race the classical planners on one instance, then sweep the budget.

Exhaustive search gives the true optimum on a small grid, so the gap of
each heuristic is exact. The budget sweep at the end shows diminishing
returns as the walk gets room to cover the field, written to
demo_budget.svg.
"""

import time

from ipplan import (
    GaConfig,
    GpModel,
    KernelParams,
    ProblemInstance,
    RgConfig,
    brute_force,
    build_grid_graph,
    genetic,
    greedy_tsp,
    recursive_greedy,
    synthetic_pilot,
)
from ipplan.plots import value_vs_budget_scene, write_svg

graph = build_grid_graph(4.0, 4.0, 1.0)
params = KernelParams(1.0, 1.2, 0.05)
model = GpModel(graph, params, synthetic_pilot(graph, params, 8, seed=1))
instance = ProblemInstance(graph, model, v_s=0, v_t=24, budget=12.0)

solvers = {
    "exhaustive": lambda: brute_force(instance),
    "recursive greedy": lambda: recursive_greedy(instance, RgConfig(depth=2)),
    "greedy insertion": lambda: greedy_tsp(instance),
    "genetic": lambda: genetic(instance, GaConfig(seed=0)),
}

results = {}
for name, run in solvers.items():
    t0 = time.perf_counter()
    res = run()
    elapsed = time.perf_counter() - t0
    results[name] = res.value
    print(f"{name:>16}: value {res.value:8.4f}  {elapsed:6.2f}s  "
          f"walk {res.path}")

best = results["exhaustive"]
for name, value in results.items():
    if name != "exhaustive":
        print(f"{name:>16}: gap {100 * (best - value) / best:.2f}%")

# Budget sweep with the two fast heuristics.
series = {"greedy insertion": [], "genetic": []}
for budget in (8.0, 10.0, 12.0, 14.0, 16.0):
    inst = ProblemInstance(graph, model, v_s=0, v_t=24, budget=budget)
    series["greedy insertion"].append((budget, greedy_tsp(inst).value))
    series["genetic"].append((budget, genetic(inst, GaConfig(seed=0)).value))

write_svg(value_vs_budget_scene(series, title="value vs budget"), "demo_budget.svg")
print("wrote demo_budget.svg")
