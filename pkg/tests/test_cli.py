"""The ippctl command line, driven through main(argv)."""

import json
import textwrap
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ipplan.cli import main
from ipplan.fields import synthetic_pilot
from ipplan.gp import KernelParams
from ipplan.graph import build_grid_graph
from ipplan.results import read_records


@pytest.fixture
def grid_config(tmp_path):
    f = tmp_path / "exp.yaml"
    f.write_text(
        textwrap.dedent(
            """
            name: cli-grid
            graph: {kind: grid, width_m: 2, height_m: 2, spacing: 1.0}
            kernel: {signal_variance: 1.0, lengthscale: 0.8, noise_variance: 0.05}
            pilot: {kind: synthetic, n_points: 6, seed: 3}
            instance: {v_s: 0, v_t: 8, budget: 6.0, sample_interval: 1.0}
            training:
              episodes: 30
              epoch_size: 15
              hidden_size: 8
              eps_decay_epochs: 2
            solvers:
              ga: {population_size: 10, generations: 3}
              rg: {depth: 1}
            """
        )
    )
    return f


def test_no_arguments_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert "ippctl" in capsys.readouterr().out


def test_fit_gp_writes_parameters(tmp_path, capsys):
    g = build_grid_graph(4, 4, 1.0)
    pilot = synthetic_pilot(g, KernelParams(1.5, 1.2, 0.05), 30, seed=2)
    csv = tmp_path / "pilot.csv"
    pilot.to_csv(csv)
    out = tmp_path / "params.json"
    rc = main(["fit-gp", "--pilot", str(csv), "--out", str(out), "--n-starts", "2"])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["signal_variance"] > 0
    assert payload["lengthscale"] > 0
    assert payload["noise_variance"] > 0
    assert "fitted on 30 points" in capsys.readouterr().out


def test_fit_gp_missing_file_is_error(tmp_path, capsys):
    rc = main(["fit-gp", "--pilot", str(tmp_path / "nope.csv")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_plan_brute_writes_record(grid_config, tmp_path, capsys):
    out = tmp_path / "runs.jsonl"
    rc = main(["plan", "--config", str(grid_config), "--solver", "brute", "--out", str(out)])
    assert rc == 0
    records = read_records(out)
    assert len(records) == 1
    r = records[0]
    assert r.solver == "brute"
    assert r.path[0] == 0 and r.path[-1] == 8
    assert r.extra["complete"] is True
    assert "value=" in capsys.readouterr().out


def test_plan_ga_uses_config_knobs(grid_config, tmp_path):
    out = tmp_path / "runs.jsonl"
    rc = main(["plan", "--config", str(grid_config), "--solver", "ga", "--out", str(out)])
    assert rc == 0
    (r,) = read_records(out)
    assert len(r.extra["best_history"]) == 4  # init + 3 generations


def test_plan_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: x\n")  # missing everything else
    rc = main(["plan", "--config", str(bad), "--solver", "brute"])
    assert rc == 2
    assert "missing required section" in capsys.readouterr().err


def test_train_transfer_roundtrip(grid_config, tmp_path, capsys):
    ckpt = tmp_path / "net.npz"
    out = tmp_path / "runs.jsonl"
    rc = main(
        ["train", "--config", str(grid_config), "--checkpoint", str(ckpt), "--out", str(out)]
    )
    assert rc == 0
    assert ckpt.exists()
    (r,) = read_records(out)
    assert r.solver == "rl"
    assert len(r.extra["epoch_mean_rewards"]) == 2
    assert len(r.extra["best_trace"]) == 30

    # same graph, shifted budget: fine-tuning should load cleanly
    moved = tmp_path / "moved.yaml"
    moved.write_text(
        grid_config.read_text().replace("budget: 6.0", "budget: 5.0")
    )
    rc = main(
        [
            "transfer",
            "--config", str(moved),
            "--checkpoint", str(ckpt),
            "--episodes", "10",
            "--out", str(out),
        ]
    )
    assert rc == 0
    records = read_records(out)
    assert len(records) == 2
    assert records[1].budget == 5.0
    assert "fine-tuned 10 episodes" in capsys.readouterr().out


def test_transfer_refuses_vertex_count_mismatch(grid_config, tmp_path, capsys):
    ckpt = tmp_path / "net.npz"
    assert main(["train", "--config", str(grid_config), "--checkpoint", str(ckpt)]) == 0
    bigger = tmp_path / "bigger.yaml"
    bigger.write_text(
        grid_config.read_text().replace(
            "width_m: 2, height_m: 2", "width_m: 3, height_m: 3"
        ).replace("v_t: 8", "v_t: 15")
    )
    rc = main(["transfer", "--config", str(bigger), "--checkpoint", str(ckpt)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "9-vertex" in err and "16" in err


def test_bench_runs_suite(grid_config, tmp_path, capsys):
    out_dir = tmp_path / "bench"
    rc = main(
        [
            "bench",
            "--config", str(grid_config),
            "--solvers", "brute,ga",
            "--seeds", "0,1",
            "--out-dir", str(out_dir),
        ]
    )
    assert rc == 0
    records = read_records(out_dir / "records.jsonl")
    # brute is deterministic so it runs once; ga runs per seed
    assert [(r.solver, r.seed) for r in records] == [("brute", 0), ("ga", 0), ("ga", 1)]
    summary = (out_dir / "summary.csv").read_text().splitlines()
    assert len(summary) == 3  # header + two solver rows


def test_bench_unknown_solver_exits_2(grid_config, tmp_path, capsys):
    rc = main(
        [
            "bench",
            "--config", str(grid_config),
            "--solvers", "brute,quantum",
            "--out-dir", str(tmp_path / "b"),
        ]
    )
    assert rc == 2
    assert "quantum" in capsys.readouterr().err


def test_plot_budget_and_path(grid_config, tmp_path):
    out_dir = tmp_path / "bench"
    assert (
        main(
            [
                "bench",
                "--config", str(grid_config),
                "--solvers", "brute,greedy",
                "--seeds", "0",
                "--out-dir", str(out_dir),
            ]
        )
        == 0
    )
    fig = tmp_path / "budget.svg"
    rc = main(
        ["plot", "--results", str(out_dir / "records.jsonl"), "--kind", "budget", "--out", str(fig)]
    )
    assert rc == 0
    ET.fromstring(fig.read_text())

    fig2 = tmp_path / "path.svg"
    rc = main(
        [
            "plot",
            "--results", str(out_dir / "records.jsonl"),
            "--kind", "path",
            "--config", str(grid_config),
            "--out", str(fig2),
        ]
    )
    assert rc == 0
    ET.fromstring(fig2.read_text())


def test_plot_reward_from_training_record(grid_config, tmp_path):
    out = tmp_path / "runs.jsonl"
    assert main(["train", "--config", str(grid_config), "--out", str(out)]) == 0
    fig = tmp_path / "reward.svg"
    rc = main(["plot", "--results", str(out), "--kind", "reward", "--out", str(fig)])
    assert rc == 0
    ET.fromstring(fig.read_text())


def test_plot_no_matching_records(grid_config, tmp_path, capsys):
    out = tmp_path / "runs.jsonl"
    assert main(["plan", "--config", str(grid_config), "--solver", "brute", "--out", str(out)]) == 0
    rc = main(
        ["plot", "--results", str(out), "--kind", "reward", "--out", str(tmp_path / "x.svg")]
    )
    assert rc == 1
    assert "no training records" in capsys.readouterr().err


def test_plot_path_requires_config(grid_config, tmp_path, capsys):
    out = tmp_path / "runs.jsonl"
    assert main(["plan", "--config", str(grid_config), "--solver", "brute", "--out", str(out)]) == 0
    rc = main(["plot", "--results", str(out), "--kind", "path", "--out", str(tmp_path / "x.svg")])
    assert rc == 1
    assert "needs --config" in capsys.readouterr().err
