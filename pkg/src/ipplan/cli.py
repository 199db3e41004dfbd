"""Command-line front end: ``ippctl``.

Subcommands map one-to-one onto library calls:

* ``fit-gp``     fit kernel hyperparameters to a pilot CSV
* ``plan``       run one classical solver from an experiment file
* ``train``      train the recurrent Q-policy
* ``transfer``   fine-tune a trained policy on a changed instance
* ``bench``      run a solver suite across seeds, write records + summary
* ``plot``       turn result records into SVG figures

Every command exits 0 on success, 1 on a runtime failure (numerical issues,
bad checkpoints, solver errors), and 2 on bad usage or config.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import GaConfig, RgConfig, brute_force, genetic, greedy_tsp, recursive_greedy
from .config import ConfigError, load_experiment, build_instance, training_config
from .gp import KernelParams, NumericalError, PilotData, fit_hyperparameters
from .qlearn import (
    CheckpointError,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .results import PlanRecord, read_records, write_records, write_summary_csv
from .plots import (
    path_overlay_scene,
    reward_curves_scene,
    value_vs_budget_scene,
    write_svg,
)

CLASSICAL_SOLVERS = ("brute", "rg", "greedy", "ga")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ippctl",
        description="budget-constrained informative path planning toolkit",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit-gp", help="fit kernel hyperparameters to pilot data")
    fit.add_argument("--pilot", required=True, help="pilot CSV (x,y,value)")
    fit.add_argument("--out", help="write fitted parameters to this JSON file")
    fit.add_argument("--n-starts", type=int, default=5)
    fit.add_argument("--seed", type=int, default=0)

    plan = sub.add_parser("plan", help="run a classical solver")
    plan.add_argument("--config", required=True, help="experiment YAML")
    plan.add_argument("--solver", required=True, choices=CLASSICAL_SOLVERS)
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--out", help="append a JSONL record here")

    tr = sub.add_parser("train", help="train the recurrent Q-policy")
    tr.add_argument("--config", required=True, help="experiment YAML")
    tr.add_argument("--episodes", type=int, help="override episode count")
    tr.add_argument("--seed", type=int, help="override training seed")
    tr.add_argument("--checkpoint", help="write the trained network here (npz)")
    tr.add_argument("--out", help="append a JSONL record here")

    tf = sub.add_parser("transfer", help="fine-tune a trained policy")
    tf.add_argument("--config", required=True, help="experiment YAML (the new instance)")
    tf.add_argument("--checkpoint", required=True, help="source network (npz)")
    tf.add_argument("--episodes", type=int, help="override episode count")
    tf.add_argument("--seed", type=int, help="override training seed")
    tf.add_argument("--checkpoint-out", help="write the fine-tuned network here")
    tf.add_argument("--out", help="append a JSONL record here")

    be = sub.add_parser("bench", help="run a solver suite across seeds")
    be.add_argument("--config", required=True, help="experiment YAML")
    be.add_argument(
        "--solvers",
        default="brute,rg,greedy,ga,rl",
        help="comma list from brute,rg,greedy,ga,rl",
    )
    be.add_argument("--seeds", default="0", help="comma list of seeds")
    be.add_argument("--out-dir", required=True)

    pl = sub.add_parser("plot", help="render result records to SVG")
    pl.add_argument("--results", required=True, help="JSONL records")
    pl.add_argument("--kind", required=True, choices=("reward", "budget", "path"))
    pl.add_argument("--out", required=True, help="output SVG path")
    pl.add_argument("--config", help="experiment YAML (needed for --kind path)")
    pl.add_argument("--solver", help="restrict records to one solver")
    return p


def _cmd_fit_gp(args) -> int:
    pilot = PilotData.from_csv(args.pilot)
    var0 = max(float(np.var(pilot.values)), 1e-4)
    span = max(float(np.ptp(pilot.locations, axis=0).max()), 1e-3)
    init = KernelParams(var0, span / 5.0, var0 / 10.0)
    res = fit_hyperparameters(pilot, init, n_starts=args.n_starts, seed=args.seed)
    p = res.params
    print(
        f"fitted on {len(pilot.values)} points: "
        f"signal_variance={p.signal_variance:.6g} "
        f"lengthscale={p.lengthscale:.6g} "
        f"noise_variance={p.noise_variance:.6g} "
        f"lml={res.log_marginal_likelihood:.6g}"
        + (" (degenerate pilot)" if res.degenerate else "")
    )
    if args.out:
        payload = {
            "signal_variance": p.signal_variance,
            "lengthscale": p.lengthscale,
            "noise_variance": p.noise_variance,
            "log_marginal_likelihood": res.log_marginal_likelihood,
            "degenerate": res.degenerate,
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {args.out}")
    return 0


def _classical_record(cfg, instance, solver: str, seed: int) -> PlanRecord:
    knobs = dict(cfg.solvers.get(solver, {}))
    t0 = time.perf_counter()
    if solver == "brute":
        r = brute_force(instance, **knobs)
        path, value = r.path, r.value
        extra = {"n_paths": r.n_paths, "complete": r.complete}
    elif solver == "rg":
        r = recursive_greedy(instance, RgConfig(**knobs))
        path, value = r.path, r.value
        extra = {"n_oracle_calls": r.n_oracle_calls}
    elif solver == "greedy":
        r = greedy_tsp(instance)
        path, value = r.path, r.value
        extra = {"selected": r.selected}
    elif solver == "ga":
        knobs.setdefault("seed", seed)
        r = genetic(instance, GaConfig(**knobs))
        path, value = r.path, r.value
        extra = {"best_history": r.best_history}
    else:
        raise ConfigError(f"unknown solver {solver!r}")
    return PlanRecord(
        solver=solver,
        instance=cfg.name,
        seed=seed,
        budget=instance.budget,
        value=value,
        wall_time_s=time.perf_counter() - t0,
        path=tuple(path) if path is not None else None,
        extra=extra,
    )


def _train_record(cfg, instance, seed, episodes, initial_net=None):
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if episodes is not None:
        overrides["episodes"] = episodes
    tc = training_config(cfg, **overrides)
    res = train(instance, tc, initial_net=initial_net)
    record = PlanRecord(
        solver="rl",
        instance=cfg.name,
        seed=tc.seed,
        budget=instance.budget,
        value=res.best_value,
        wall_time_s=res.wall_time_s,
        path=tuple(res.best_path) if res.best_path is not None else None,
        extra={
            "epoch_mean_rewards": res.epoch_mean_rewards,
            "best_trace": res.best_trace,
            "initial_value": res.initial_value,
            "n_penalized": res.n_penalized,
            "n_episodes": res.n_episodes,
            "epoch_size": tc.epoch_size,
        },
    )
    return record, res


def _checkpoint_meta(cfg, instance, tc_seed) -> dict:
    return {
        "experiment": cfg.name,
        "graph_fingerprint": instance.graph.fingerprint(),
        "n_vertices": instance.graph.n_vertices,
        "v_s": instance.v_s,
        "v_t": instance.v_t,
        "budget": instance.budget,
        "sample_interval": instance.sample_interval,
        "seed": tc_seed,
    }


def _append_record(out, record) -> None:
    if out:
        write_records(out, [record], append=True)
        print(f"appended record to {out}")


def _cmd_plan(args) -> int:
    cfg = load_experiment(args.config)
    instance, _ = build_instance(cfg)
    record = _classical_record(cfg, instance, args.solver, args.seed)
    print(
        f"{args.solver} on {cfg.name}: value={record.value:.6f} nats, "
        f"cost budget={record.budget:g}, {record.wall_time_s:.2f}s"
    )
    _append_record(args.out, record)
    return 0


def _cmd_train(args) -> int:
    cfg = load_experiment(args.config)
    instance, _ = build_instance(cfg)
    record, res = _train_record(cfg, instance, args.seed, args.episodes)
    print(
        f"trained {res.n_episodes} episodes in {res.wall_time_s:.1f}s: "
        f"best={res.best_value:.6f} nats, penalized={res.n_penalized}"
    )
    if args.checkpoint:
        meta = _checkpoint_meta(cfg, instance, record.seed)
        Path(args.checkpoint).write_bytes(save_checkpoint(res.net, meta))
        print(f"wrote {args.checkpoint}")
    _append_record(args.out, record)
    return 0


def _cmd_transfer(args) -> int:
    cfg = load_experiment(args.config)
    instance, _ = build_instance(cfg)
    net, meta = load_checkpoint(Path(args.checkpoint).read_bytes())
    if net.n_vertices != instance.graph.n_vertices:
        raise CheckpointError(
            f"checkpoint is for a {net.n_vertices}-vertex graph, the "
            f"instance has {instance.graph.n_vertices}; transfer needs a "
            "matching vertex set"
        )
    if meta.get("graph_fingerprint") not in (None, instance.graph.fingerprint()):
        print("note: checkpoint comes from a different graph layout", file=sys.stderr)
    record, res = _train_record(cfg, instance, args.seed, args.episodes, initial_net=net)
    print(
        f"fine-tuned {res.n_episodes} episodes in {res.wall_time_s:.1f}s: "
        f"best={res.best_value:.6f} nats"
    )
    if args.checkpoint_out:
        out_meta = _checkpoint_meta(cfg, instance, record.seed)
        Path(args.checkpoint_out).write_bytes(save_checkpoint(res.net, out_meta))
        print(f"wrote {args.checkpoint_out}")
    _append_record(args.out, record)
    return 0


def _cmd_bench(args) -> int:
    cfg = load_experiment(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    unknown = [s for s in solvers if s not in CLASSICAL_SOLVERS + ("rl",)]
    if unknown:
        raise ConfigError(f"unknown solvers {unknown}")
    instance, _ = build_instance(cfg)
    records = []
    for solver in solvers:
        deterministic = solver in ("brute", "rg", "greedy")
        for seed in seeds:
            if solver == "rl":
                record, _ = _train_record(cfg, instance, seed, None)
            else:
                record = _classical_record(cfg, instance, solver, seed)
            records.append(record)
            print(
                f"{solver} seed={seed}: value={record.value:.6f} "
                f"({record.wall_time_s:.2f}s)"
            )
            if deterministic:
                break  # further seeds would repeat the identical run
    jsonl = out_dir / "records.jsonl"
    write_records(jsonl, records)
    csv_path = out_dir / "summary.csv"
    write_summary_csv(csv_path, records)
    print(f"wrote {jsonl} and {csv_path}")
    return 0


def _cmd_plot(args) -> int:
    records = read_records(args.results)
    if args.solver:
        records = [r for r in records if r.solver == args.solver]
    if not records:
        raise ValueError("no matching records to plot")
    if args.kind == "reward":
        rl = [r for r in records if "epoch_mean_rewards" in r.extra]
        if not rl:
            raise ValueError("no training records with reward traces")
        scene = reward_curves_scene(
            [r.extra["epoch_mean_rewards"] for r in rl],
            [r.extra["best_trace"] for r in rl if "best_trace" in r.extra] or None,
            epoch_size=int(rl[0].extra.get("epoch_size", 50)),
            title=f"training reward ({rl[0].instance})",
        )
    elif args.kind == "budget":
        series: dict[str, list[tuple[float, float]]] = {}
        for r in records:
            series.setdefault(r.solver, []).append((r.budget, r.value))
        scene = value_vs_budget_scene(series)
    else:  # path
        if not args.config:
            raise ValueError("--kind path needs --config to rebuild the world")
        cfg = load_experiment(args.config)
        instance, _ = build_instance(cfg)
        with_path = [r for r in records if r.path]
        if not with_path:
            raise ValueError("no records carry a path")
        best = max(with_path, key=lambda r: r.value)
        scene = path_overlay_scene(
            instance.graph,
            instance.model,
            list(best.path),
            title=f"{best.solver} on {best.instance}: {best.value:.3f} nats",
        )
    write_svg(scene, args.out)
    print(f"wrote {args.out}")
    return 0


_HANDLERS = {
    "fit-gp": _cmd_fit_gp,
    "plan": _cmd_plan,
    "train": _cmd_train,
    "transfer": _cmd_transfer,
    "bench": _cmd_bench,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (CheckpointError, NumericalError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
