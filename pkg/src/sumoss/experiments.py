"""Batch experiments: paired method comparison and the (w1, w2) sensitivity sweep."""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import SumossError
from .simulator import METHODS, MissionConfig, run_mission

__all__ = [
    "WEIGHT_GRID",
    "derive_seed",
    "comparison_seeds",
    "ComparisonResult",
    "compare_methods",
    "SweepSpec",
    "SweepCell",
    "SweepResult",
    "sensitivity_sweep",
]

log = logging.getLogger(__name__)

WEIGHT_GRID = (0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)


def derive_seed(master: int, w1: float, w2: float, run: int, experiment: str = "sweep") -> int:
    """Stable 63-bit seed for one run of one (w1, w2) cell.

    Depends only on its arguments, so adding cells never shifts existing seeds.
    ``experiment`` keeps comparison and sweep seeds apart under one master seed.
    """
    key = f"sumoss:{experiment}:{int(master)}:{float(w1)!r}:{float(w2)!r}:{int(run)}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


def _execute(config: MissionConfig):
    try:
        return run_mission(config), None
    except SumossError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _run_all(configs: list, workers: int) -> list:
    if workers <= 1 or len(configs) <= 1:
        return [_execute(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute, configs, chunksize=max(1, len(configs) // (4 * workers))))


@dataclass
class ComparisonResult:
    """Per-method mission logs on a shared seed list."""

    seeds: list
    runs: dict = field(default_factory=dict)  # method -> list[MissionLog]
    failures: dict = field(default_factory=dict)  # method -> list[(seed, message)]

    @property
    def methods(self) -> list[str]:
        return sorted(self.runs)

    def curves(self, method: str) -> np.ndarray:
        return np.array([r.curve() for r in self.runs[method]])

    def mean_curve(self, method: str) -> np.ndarray:
        return self.curves(method).mean(axis=0)


def comparison_seeds(master: int, w1: float, w2: float, runs: int) -> list[int]:
    return [derive_seed(master, w1, w2, r, "compare") for r in range(runs)]


def compare_methods(
    config: MissionConfig, methods=METHODS, seeds=range(10), workers: int = 1
) -> ComparisonResult:
    """Run every method on the same seeds; landing noise is paired by seed and step."""
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("compare_methods needs at least one seed")
    methods = sorted(set(methods))
    jobs = [(m, s) for m in methods for s in seeds]
    outcomes = _run_all([replace(config.with_method(m), seed=s) for m, s in jobs], workers)
    result = ComparisonResult(seeds=seeds)
    for m in methods:
        result.runs[m], result.failures[m] = [], []
    for (m, s), (mission, err) in zip(jobs, outcomes):
        if err is None:
            result.runs[m].append(mission)
        else:
            log.warning("mission %s seed %d failed: %s", m, s, err)
            result.failures[m].append((s, err))
    return result


@dataclass(frozen=True)
class SweepSpec:
    w1_values: tuple = WEIGHT_GRID
    w2_values: tuple = WEIGHT_GRID
    runs: int = 10
    base: MissionConfig = field(default_factory=MissionConfig)
    methods: tuple = ("sumoss", "baseline")
    checkpoints: tuple = (3, 6, 9, 12)
    master_seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs per cell must be >= 1")
        if not self.w1_values or not self.w2_values:
            raise ValueError("weight grids must be non-empty")
        if any(not 1 <= n <= self.base.n_max for n in self.checkpoints):
            raise ValueError(f"checkpoints must lie in [1, n_max={self.base.n_max}]")
        if not {"sumoss", "baseline"} <= set(self.methods):
            raise ValueError("a sweep compares at least 'sumoss' and 'baseline'")

    def seeds(self, w1: float, w2: float) -> list[int]:
        return [derive_seed(self.master_seed, w1, w2, r) for r in range(self.runs)]


@dataclass
class SweepCell:
    w1: float
    w2: float
    seeds: list
    curves: dict = field(default_factory=dict)  # method -> (runs, n_max) array
    run_seeds: dict = field(default_factory=dict)  # method -> seeds of the rows of curves
    failures: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not any(self.failures.values())

    def mean_mi(self, method: str, n: int) -> float:
        return float(self.curves[method][:, n - 1].mean())

    def delta(self, n: int) -> float:
        return self.mean_mi("sumoss", n) - self.mean_mi("baseline", n)

    def run_count(self, method: str) -> int:
        return len(self.curves[method])


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: dict = field(default_factory=dict)  # (w1, w2) -> SweepCell

    @property
    def mission_count(self) -> int:
        return sum(c.run_count(m) + len(c.failures[m]) for c in self.cells.values() for m in c.curves)

    def delta_table(self, n: int) -> np.ndarray:
        """Delta_n as a ``(len(w1_values), len(w2_values))`` array."""
        return np.array([[self.cells[(a, b)].delta(n) for b in self.spec.w2_values] for a in self.spec.w1_values])

    def positive_cells(self, n: int) -> int:
        return int(np.sum(self.delta_table(n) > 0))


def sensitivity_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every method in every (w1, w2) cell on the cell's seed list."""
    methods = sorted(set(spec.methods))
    jobs = []
    for w1 in spec.w1_values:
        for w2 in spec.w2_values:
            cfg = spec.base.with_weights(w1, w2)
            for m in methods:
                for s in spec.seeds(w1, w2):
                    jobs.append(((w1, w2), m, s, replace(cfg.with_method(m), seed=s)))
    outcomes = _run_all([j[-1] for j in jobs], workers)

    result = SweepResult(spec)
    collected: dict = {}
    for (key, m, s, _), (mission, err) in zip(jobs, outcomes):
        cell = result.cells.setdefault(key, SweepCell(key[0], key[1], spec.seeds(*key)))
        cell.failures.setdefault(m, [])
        if err is None:
            collected.setdefault((key, m), []).append((s, mission.curve()))
        else:
            log.warning("sweep cell %s %s seed %d failed: %s", key, m, s, err)
            cell.failures[m].append((s, err))
    for key, cell in result.cells.items():
        for m in methods:
            rows = collected.get((key, m), [])
            cell.run_seeds[m] = [s for s, _ in rows]
            cell.curves[m] = np.array([c for _, c in rows]).reshape(len(rows), spec.base.n_max)
    return result

