"""Train the recurrent Q-learning planner and inspect what it learned.

A small instance keeps this to about a minute. Training logs one line per
epoch; afterwards the learned walk is compared against exhaustive search
and both the reward curve and the walk overlay are written as SVGs. The
trained network is saved so 04_transfer.py can warm-start from it.
"""

from pathlib import Path

from ipplan import (
    GpModel,
    KernelParams,
    ProblemInstance,
    TrainingConfig,
    brute_force,
    build_grid_graph,
    greedy_rollout,
    save_checkpoint,
    synthetic_pilot,
    train,
)
from ipplan.plots import path_overlay_scene, reward_curves_scene, write_svg

graph = build_grid_graph(3.0, 3.0, 1.0)
params = KernelParams(1.0, 1.2, 0.05)
model = GpModel(graph, params, synthetic_pilot(graph, params, 8, seed=2))
instance = ProblemInstance(graph, model, v_s=0, v_t=15, budget=10.0)

config = TrainingConfig(episodes=1500, hidden_size=32, seed=0)
result = train(instance, config)

for i, mean in enumerate(result.epoch_mean_rewards):
    print(f"epoch {i:2d}: mean reward {mean:8.4f}")

truth = brute_force(instance)
print(f"\nlearned best: {result.best_value:.4f}  walk {result.best_path}")
print(f"   optimum:   {truth.value:.4f}  walk {truth.path}")
print(f"valid episodes: {sum(result.valid_episodes)}/{result.n_episodes}, "
      f"penalized: {result.n_penalized}")

rollout = greedy_rollout(result.net, instance, restrict_to_valid=True)
print(f"greedy rollout: value {rollout.value:.4f}  valid {rollout.valid}")

scene = reward_curves_scene(
    [result.epoch_mean_rewards], best_traces=[result.best_trace],
    epoch_size=config.epoch_size, title="training reward",
)
write_svg(scene, "demo_training.svg")
write_svg(path_overlay_scene(graph, model, result.best_path, title="learned walk"),
          "demo_walk.svg")

Path("demo_policy.ckpt").write_bytes(
    save_checkpoint(result.net, meta={"budget": instance.budget})
)
print("wrote demo_training.svg demo_walk.svg demo_policy.ckpt")
