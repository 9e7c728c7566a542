"""Deterministic file formats: mission logs (JSON lines) and curve/sweep tables (CSV + JSON).

Numbers in CSV files carry 10 significant digits; JSON files keep the full
round-trip representation. Nothing written depends on the clock or locale.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .config import mission_from_dict, mission_to_dict
from .errors import LogValidationError
from .experiments import ComparisonResult, SweepResult
from .simulator import MissionLog, MissionStep

__all__ = [
    "CURVE_COLUMNS",
    "SWEEP_COLUMNS",
    "fmt",
    "write_mission_log",
    "read_mission_log",
    "curve_rows",
    "write_curves",
    "write_mean_curves",
    "sweep_rows",
    "write_sweep",
    "write_sweep_runs",
    "write_sweep_ranks",
]

CURVE_COLUMNS = [
    "method", "seed", "n", "target_x", "target_y", "landing_x", "landing_y",
    "planner_gain", "true_gain", "mi_cumulative",
]
SWEEP_COLUMNS = ["w1", "w2", "n", "mean_mi_proposed", "mean_mi_baseline", "delta_n", "runs"]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    return str(value)


def _write_csv(path: Path, columns: list, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row[c]) for c in columns])


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


# -- mission logs -------------------------------------------------------------


def write_mission_log(log: MissionLog, path) -> Path:
    """One ``step`` record per line, then a ``summary`` record."""
    path = Path(path)
    lines = []
    for s in log.steps:
        lines.append(
            _dumps(
                {
                    "record": "step",
                    "n": s.n,
                    "target_index": s.target_index,
                    "target": list(s.target),
                    "landing": list(s.landing),
                    "planner_gain": s.planner_gain,
                    "true_gain": s.true_gain,
                    "mi_cumulative": s.mi_cumulative,
                    "perturbed": s.perturbed,
                }
            )
        )
    lines.append(
        _dumps(
            {
                "record": "summary",
                "method": log.method,
                "seed": log.seed,
                "n_steps": len(log.steps),
                "mi_final": log.steps[-1].mi_cumulative if log.steps else 0.0,
                "config": mission_to_dict(log.config),
            }
        )
    )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


_STEP_KEYS = {"record", "n", "target_index", "target", "landing", "planner_gain", "true_gain", "mi_cumulative", "perturbed"}


def read_mission_log(path) -> MissionLog:
    steps, summary = [], None
    for no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogValidationError(f"{path}:{no}: invalid JSON ({exc.msg})") from exc
        kind = rec.get("record")
        if kind == "step":
            if set(rec) != _STEP_KEYS:
                raise LogValidationError(f"{path}:{no}: step record keys {sorted(rec)} do not match schema")
            steps.append(
                MissionStep(
                    n=rec["n"],
                    target_index=rec["target_index"],
                    target=tuple(rec["target"]),
                    landing=tuple(rec["landing"]),
                    planner_gain=rec["planner_gain"],
                    true_gain=rec["true_gain"],
                    mi_cumulative=rec["mi_cumulative"],
                    perturbed=rec["perturbed"],
                )
            )
        elif kind == "summary":
            summary = rec
        else:
            raise LogValidationError(f"{path}:{no}: unknown record type {kind!r}")
    if summary is None:
        raise LogValidationError(f"{path}: missing summary record")
    config = mission_from_dict(summary["config"], str(path))
    if summary["n_steps"] != len(steps):
        raise LogValidationError(f"{path}: summary announces {summary['n_steps']} steps, found {len(steps)}")
    return MissionLog(config, steps)


# -- comparison curves --------------------------------------------------------


def curve_rows(result: ComparisonResult) -> list[dict]:
    rows = []
    for m in result.methods:
        for run in sorted(result.runs[m], key=lambda r: r.seed):
            for s in run.steps:
                rows.append(
                    {
                        "method": m,
                        "seed": run.seed,
                        "n": s.n,
                        "target_x": s.target[0],
                        "target_y": s.target[1],
                        "landing_x": s.landing[0],
                        "landing_y": s.landing[1],
                        "planner_gain": s.planner_gain,
                        "true_gain": s.true_gain,
                        "mi_cumulative": s.mi_cumulative,
                    }
                )
    return rows


def write_curves(result: ComparisonResult, out_dir, stem: str = "curves") -> Path:
    out_dir = Path(out_dir)
    rows = curve_rows(result)
    path = out_dir / f"{stem}.csv"
    _write_csv(path, CURVE_COLUMNS, rows)
    _write_json(out_dir / f"{stem}.json", rows)
    return path


def write_mean_curves(result: ComparisonResult, out_dir, stem: str = "mean_curves") -> Path:
    out_dir = Path(out_dir)
    rows = []
    for m in result.methods:
        if not result.runs[m]:
            continue
        for n, v in enumerate(result.mean_curve(m), 1):
            rows.append({"method": m, "n": n, "mean_mi": float(v), "runs": len(result.runs[m]), "failed": len(result.failures[m])})
    path = out_dir / f"{stem}.csv"
    _write_csv(path, ["method", "n", "mean_mi", "runs", "failed"], rows)
    _write_json(out_dir / f"{stem}.json", rows)
    return path


# -- sensitivity sweep ------------------------------------------------------------


def sweep_rows(result: SweepResult) -> list[dict]:
    rows = []
    spec = result.spec
    for w1 in sorted(spec.w1_values):
        for w2 in sorted(spec.w2_values):
            cell = result.cells[(w1, w2)]
            for n in sorted(spec.checkpoints):
                rows.append(
                    {
                        "w1": w1,
                        "w2": w2,
                        "n": n,
                        "mean_mi_proposed": cell.mean_mi("sumoss", n),
                        "mean_mi_baseline": cell.mean_mi("baseline", n),
                        "delta_n": cell.delta(n),
                        "runs": min(cell.run_count("sumoss"), cell.run_count("baseline")),
                    }
                )
    return rows


def write_sweep(result: SweepResult, out_dir, stem: str = "sweep") -> Path:
    out_dir = Path(out_dir)
    rows = sweep_rows(result)
    path = out_dir / f"{stem}.csv"
    _write_csv(path, SWEEP_COLUMNS, rows)
    _write_json(out_dir / f"{stem}.json", rows)
    return path


def write_sweep_runs(result: SweepResult, out_dir, stem: str = "sweep_runs") -> Path:
    """Every mission of the sweep: its cell, method, seed and final MI."""
    out_dir = Path(out_dir)
    rows = []
    for (w1, w2) in sorted(result.cells):
        cell = result.cells[(w1, w2)]
        for m in sorted(cell.curves):
            for seed, curve in zip(cell.run_seeds[m], cell.curves[m]):
                rows.append({"w1": w1, "w2": w2, "method": m, "seed": seed, "status": "ok", "mi_final": float(curve[-1])})
            for seed, err in cell.failures[m]:
                rows.append({"w1": w1, "w2": w2, "method": m, "seed": seed, "status": err, "mi_final": None})
    columns = ["w1", "w2", "method", "seed", "status", "mi_final"]
    path = out_dir / f"{stem}.csv"
    _write_csv(path, columns, rows)
    _write_json(out_dir / f"{stem}.json", rows)
    return path


def write_sweep_ranks(result: SweepResult, out_dir, stem: str = "sweep_ranks") -> Path:
    """Rank of each cell's Delta_n within its checkpoint (1 = largest)."""
    out_dir = Path(out_dir)
    rows = []
    for n in sorted(result.spec.checkpoints):
        keyed = sorted(result.cells, key=lambda k: (-result.cells[k].delta(n), k))
        total = len(keyed)
        for rank, (w1, w2) in enumerate(keyed, 1):
            mark = "top" if rank <= 3 else ("bottom" if rank > total - 3 else "")
            rows.append({"n": n, "rank": rank, "w1": w1, "w2": w2, "delta_n": result.cells[(w1, w2)].delta(n), "mark": mark})
    columns = ["n", "rank", "w1", "w2", "delta_n", "mark"]
    path = out_dir / f"{stem}.csv"
    _write_csv(path, columns, rows)
    _write_json(out_dir / f"{stem}.json", rows)
    return path
