"""Record serialization and summaries."""

import numpy as np
import pytest

from ipplan.results import (
    PlanRecord,
    read_records,
    record_from_json,
    record_to_json,
    summarize,
    write_records,
    write_summary_csv,
)


def sample_record(**kw):
    base = dict(
        solver="ga",
        instance="demo",
        seed=3,
        budget=18.0,
        value=0.1 + 0.2,  # deliberately not representable cleanly
        wall_time_s=1.2345678901234567,
        path=(0, 1, 4, 8),
        extra={"history": [1.0, 2.0]},
    )
    base.update(kw)
    return PlanRecord(**base)


def test_json_roundtrip_is_bitwise_for_floats():
    r = sample_record(value=1e-17 + 2.0, wall_time_s=123456.78901234567)
    back = record_from_json(record_to_json(r))
    assert back.value == r.value  # exact, not approx
    assert back.wall_time_s == r.wall_time_s
    assert back.budget == r.budget
    assert back.path == r.path
    assert back.extra == r.extra


def test_none_path_roundtrip():
    r = sample_record(path=None)
    back = record_from_json(record_to_json(r))
    assert back.path is None


def test_numpy_values_in_extra_are_flattened():
    r = sample_record(
        extra={
            "trace": np.array([1.5, 2.5]),
            "count": np.int64(7),
            "flag": np.bool_(True),
            "nested": {"x": np.float64(0.25)},
        }
    )
    back = record_from_json(record_to_json(r))
    assert back.extra == {
        "trace": [1.5, 2.5],
        "count": 7,
        "flag": True,
        "nested": {"x": 0.25},
    }


def test_write_read_and_append(tmp_path):
    f = tmp_path / "runs.jsonl"
    write_records(f, [sample_record(seed=0), sample_record(seed=1)])
    write_records(f, [sample_record(seed=2)], append=True)
    got = read_records(f)
    assert [r.seed for r in got] == [0, 1, 2]


def test_read_reports_bad_line_number(tmp_path):
    f = tmp_path / "runs.jsonl"
    f.write_text(record_to_json(sample_record()) + "\n{broken\n")
    with pytest.raises(ValueError, match=":2:"):
        read_records(f)


def test_read_reports_missing_field(tmp_path):
    f = tmp_path / "runs.jsonl"
    f.write_text('{"solver": "ga"}\n')
    with pytest.raises(ValueError, match="missing field"):
        read_records(f)


def test_summarize_groups_by_instance_and_solver():
    records = [
        sample_record(solver="ga", value=1.0),
        sample_record(solver="ga", value=3.0, seed=1),
        sample_record(solver="brute", value=4.0),
        sample_record(solver="ga", instance="other", value=9.0),
    ]
    rows = summarize(records)
    assert len(rows) == 3
    ga = next(r for r in rows if r["solver"] == "ga" and r["instance"] == "demo")
    assert ga["n_runs"] == 2
    assert ga["value_mean"] == pytest.approx(2.0)
    assert ga["value_best"] == 3.0
    assert ga["value_worst"] == 1.0


def test_summary_csv_roundtrips_floats(tmp_path):
    f = tmp_path / "summary.csv"
    records = [sample_record(value=0.30000000000000004)]
    write_summary_csv(f, records)
    lines = f.read_text().strip().splitlines()
    assert lines[0].startswith("instance,solver,n_runs,")
    cells = lines[1].split(",")
    assert float(cells[3]) == 0.30000000000000004
