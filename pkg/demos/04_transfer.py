"""Warm-start training at a changed budget from a saved policy.

Run 03_train_policy.py first; it leaves demo_policy.ckpt behind. The same
instance is re-planned with the budget cut by 10%, once from scratch and
once fine-tuning the saved network, and the episode counts needed to
reach the cold run's final best reward are compared.
"""

from pathlib import Path

from ipplan import (
    GpModel,
    KernelParams,
    ProblemInstance,
    TrainingConfig,
    build_grid_graph,
    load_checkpoint,
    synthetic_pilot,
    train,
)

ckpt = Path("demo_policy.ckpt")
if not ckpt.exists():
    raise SystemExit("demo_policy.ckpt not found; run 03_train_policy.py first")

net, meta = load_checkpoint(ckpt.read_bytes())
print(f"loaded policy trained at budget {meta['budget']}")

graph = build_grid_graph(3.0, 3.0, 1.0)
params = KernelParams(1.0, 1.2, 0.05)
model = GpModel(graph, params, synthetic_pilot(graph, params, 8, seed=2))
instance = ProblemInstance(graph, model, v_s=0, v_t=15,
                           budget=0.9 * meta["budget"])

config = TrainingConfig(episodes=800, hidden_size=32, seed=7)
cold = train(instance, config)
warm = train(instance, config, initial_net=net)


def episodes_to_reach(trace, target):
    for episode, value in enumerate(trace):
        if value >= target - 1e-12:
            return episode + 1
    return None


target = cold.best_value
print(f"cold start: best {cold.best_value:.4f} "
      f"(reached at episode {episodes_to_reach(cold.best_trace, target)})")
print(f"fine-tuned: best {warm.best_value:.4f} "
      f"(matched cold's best at episode "
      f"{episodes_to_reach(warm.best_trace, target)})")
