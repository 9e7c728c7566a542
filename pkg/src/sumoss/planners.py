"""Drop-target selection policies.

All planners see only the targets chosen so far (``PlanState``), never the
true landing positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deviation import DeviationModel, DeviationSampleSet, build_sample_set, joint_offsets
from .errors import CapacityError
from .gp import KernelModel, as_points, batch_conditional_variance

__all__ = [
    "CandidateSet",
    "PlanState",
    "check_capacity",
    "baseline_gains",
    "expected_gain_terms",
    "plan_baseline",
    "plan_sumoss",
    "plan_random",
    "OBJECTIVES",
]

OBJECTIVES = ("log", "ratio")
TIE_TOL = 1e-12


@dataclass(frozen=True)
class CandidateSet:
    """Admissible drop targets plus the monitored rectangle ``(x0, y0, x1, y1)``."""

    positions: np.ndarray
    bounds: tuple = None

    def __post_init__(self):
        pts = as_points(self.positions).reshape(-1, 2).copy()
        pts.setflags(write=False)
        object.__setattr__(self, "positions", pts)
        if len(pts) < 2:
            raise ValueError("a candidate set needs at least two positions")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("candidate positions must be pairwise distinct")
        if self.bounds is None:
            object.__setattr__(self, "bounds", (*pts.min(axis=0), *pts.max(axis=0)))

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class PlanState:
    """Targets chosen so far, as candidate indices in drop order."""

    chosen: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "chosen", tuple(int(i) for i in self.chosen))
        if len(set(self.chosen)) != len(self.chosen):
            raise ValueError(f"chosen targets repeat: {self.chosen}")

    @property
    def step(self) -> int:
        return len(self.chosen)

    def add(self, index: int) -> "PlanState":
        return PlanState(self.chosen + (int(index),))


def check_capacity(state: PlanState, V: CandidateSet) -> list[int]:
    """Validate ``state`` against ``V`` and return the unchosen indices."""
    if any(i < 0 or i >= len(V) for i in state.chosen):
        raise ValueError("chosen index out of range")
    if state.step > len(V) / 2:
        raise CapacityError(f"{state.step} sensors already placed; at most |V|/2 = {len(V) / 2} allowed")
    free = [i for i in range(len(V)) if i not in set(state.chosen)]
    if not free:
        raise CapacityError("no unchosen candidate left")
    return free


def _argmax(gains: np.ndarray) -> int:
    # lowest position among values tied with the maximum
    return int(np.flatnonzero(gains >= gains.max() - TIE_TOL)[0])


def _others_variance(V: CandidateSet, free: list[int], targets: np.ndarray, kernel: KernelModel) -> np.ndarray:
    """Variance of ``targets[j]`` (shape ``(m, s, 2)``) given the nominal free set minus ``free[j]``."""
    m = len(free)
    if m == 1:
        return np.full(targets.shape[:2], kernel.prior_variance)
    pts = V.positions[free]
    keep = ~np.eye(m, dtype=bool)
    others = np.stack([pts[keep[j]] for j in range(m)])  # (m, m-1, 2)
    return batch_conditional_variance(targets, others, kernel)


def baseline_gains(state: PlanState, V: CandidateSet, kernel: KernelModel) -> tuple[list[int], np.ndarray]:
    """Exact-position MI gain of every unchosen candidate."""
    free = check_capacity(state, V)
    pts = V.positions
    num = batch_conditional_variance(pts[free], pts[list(state.chosen)], kernel)
    den = _others_variance(V, free, pts[free][:, None, :], kernel)[:, 0]
    return free, 0.5 * np.log(num / den)


def plan_baseline(state: PlanState, V: CandidateSet, kernel: KernelModel) -> tuple[int, float]:
    free, gains = baseline_gains(state, V, kernel)
    j = _argmax(gains)
    return free[j], float(gains[j])


def expected_gain_terms(
    state: PlanState,
    V: CandidateSet,
    kernel: KernelModel,
    samples: DeviationSampleSet,
    objective: str = "log",
) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Per-joint-sample objective values for every unchosen candidate.

    Returns ``(free, terms, weights)`` with ``terms`` of shape ``(J, len(free))``
    and nonnegative ``weights`` of shape ``(J,)``; the expected gain of
    candidate ``free[j]`` is ``weights @ terms[:, j]``. Each joint sample
    perturbs the already-chosen targets and the candidate; the remaining
    candidates stay at their nominal positions.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    free = check_capacity(state, V)
    chosen = list(state.chosen)
    if samples.offsets.shape[0] != len(V):
        raise ValueError("sample set must hold one row of offsets per candidate")
    pts = V.positions
    if samples.kind == "mc":
        pos = pts[None] + np.transpose(samples.offsets, (1, 0, 2))  # (S, n, 2)
        num = batch_conditional_variance(pos[:, free], pos[:, chosen], kernel)
        den = _others_variance(V, free, np.transpose(pos[:, free], (1, 0, 2)), kernel).T
        weights = samples.weights[0].copy()
    else:
        cols_num, cols_den = [], []
        for c in free:
            offs, weights = joint_offsets(samples, chosen + [c])
            pos = pts[chosen + [c]][None] + offs  # (J, k+1, 2)
            cols_num.append(batch_conditional_variance(pos[:, -1:], pos[:, :-1], kernel)[:, 0])
            rest = [i for i in free if i != c]
            cols_den.append(batch_conditional_variance(pos[:, -1], pts[rest], kernel))
        num, den = np.stack(cols_num, axis=1), np.stack(cols_den, axis=1)
    ratio = num / den
    terms = 0.5 * np.log(ratio) if objective == "log" else ratio
    return free, terms, weights


def plan_sumoss(
    state: PlanState,
    V: CandidateSet,
    kernel: KernelModel,
    dev: DeviationModel,
    samples: int | DeviationSampleSet = 128,
    seed=None,
    objective: str = "log",
) -> tuple[int, float]:
    """Pick the candidate with the largest expected MI gain under landing deviation.

    ``samples`` is either a prebuilt sample set or the number of Monte Carlo
    joint samples to draw from ``seed``. The same joint samples are used for
    every candidate.
    """
    if not isinstance(samples, DeviationSampleSet):
        samples = build_sample_set(V.positions, dev, samples, seed)
    free, terms, weights = expected_gain_terms(state, V, kernel, samples, objective)
    expected = weights @ terms
    j = _argmax(expected)
    return free[j], float(expected[j])


def plan_random(state: PlanState, V: CandidateSet, rng: np.random.Generator) -> int:
    free = check_capacity(state, V)
    return free[int(rng.integers(len(free)))]
