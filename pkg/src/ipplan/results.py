"""Run records: one JSON line per solver run, plus a CSV rollup.

Floats are written through ``json``, whose shortest-repr formatting
round-trips every finite double exactly, so a value read back compares
bitwise equal to what the solver produced.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PlanRecord",
    "record_to_json",
    "record_from_json",
    "write_records",
    "read_records",
    "summarize",
    "write_summary_csv",
]


@dataclass(frozen=True)
class PlanRecord:
    """Outcome of one solver run on one instance."""

    solver: str
    instance: str
    seed: int
    budget: float
    value: float
    wall_time_s: float
    path: tuple[int, ...] | None = None
    extra: dict = field(default_factory=dict)


def _jsonable(obj):
    """Recursively strip numpy types so json can serialize run extras."""
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return obj


def record_to_json(record: PlanRecord) -> str:
    payload = {
        "solver": record.solver,
        "instance": record.instance,
        "seed": int(record.seed),
        "budget": float(record.budget),
        "value": float(record.value),
        "wall_time_s": float(record.wall_time_s),
        "path": list(record.path) if record.path is not None else None,
        "extra": _jsonable(record.extra),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def record_from_json(line: str) -> PlanRecord:
    d = json.loads(line)
    try:
        return PlanRecord(
            solver=d["solver"],
            instance=d["instance"],
            seed=int(d["seed"]),
            budget=float(d["budget"]),
            value=float(d["value"]),
            wall_time_s=float(d["wall_time_s"]),
            path=tuple(d["path"]) if d.get("path") is not None else None,
            extra=d.get("extra", {}),
        )
    except KeyError as e:
        raise ValueError(f"record line is missing field {e}") from e


def write_records(path, records, append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as fh:
        for r in records:
            fh.write(record_to_json(r) + "\n")


def read_records(path) -> list[PlanRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(record_from_json(line))
            except (ValueError, json.JSONDecodeError) as e:
                raise ValueError(f"{path}:{lineno}: {e}") from e
    return out


def summarize(records) -> list[dict]:
    """Per (instance, solver) aggregate, ordered by first appearance."""
    groups: dict[tuple[str, str], list[PlanRecord]] = {}
    for r in records:
        groups.setdefault((r.instance, r.solver), []).append(r)
    rows = []
    for (instance, solver), rs in groups.items():
        values = [r.value for r in rs]
        rows.append(
            {
                "instance": instance,
                "solver": solver,
                "n_runs": len(rs),
                "value_mean": float(np.mean(values)),
                "value_best": max(values),
                "value_worst": min(values),
                "time_mean_s": float(np.mean([r.wall_time_s for r in rs])),
            }
        )
    return rows


def write_summary_csv(path, records) -> None:
    rows = summarize(records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["instance", "solver", "n_runs", "value_mean", "value_best", "value_worst", "time_mean_s"]
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [
                row["instance"],
                row["solver"],
                row["n_runs"],
                repr(row["value_mean"]),
                repr(row["value_best"]),
                repr(row["value_worst"]),
                repr(row["time_mean_s"]),
            ]
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())
