"""Numerical self-checks against independent oracles.

* incremental gain vs. log-determinant mutual information
* greedy selection vs. exhaustive search (the 1 - 1/e bound)
* landing sampler vs. its analytic covariance
* diminishing returns of the expected gain under shared deviation samples
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .deviation import DeviationModel, build_sample_set, sample_landing, sigma_dev
from .gp import KernelModel, delta_gain, mi_exact
from .planners import CandidateSet, PlanState, expected_gain_terms, plan_baseline

GREEDY_BOUND = 1.0 - 1.0 / math.e


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    stats: dict

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def random_instance(rng: np.random.Generator, n_min=4, n_max=10, box=5.0, phi_range=(0.5, 3.0)):
    n = int(rng.integers(n_min, n_max + 1))
    pts = rng.uniform(0.0, box, size=(n, 2))
    return pts, KernelModel(phi=float(rng.uniform(*phi_range)))


def check_delta_oracle(instances: int = 200, seed: int = 0, tol: float = 1e-8) -> SuiteResult:
    """|delta_gain - (MI(A+y) - MI(A))| over random instances."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        pts, kernel = random_instance(rng)
        n = len(pts)
        order = rng.permutation(n)
        k = int(rng.integers(0, n - 1))  # leaves at least one point outside A + y
        A, y = list(order[:k]), int(order[k])
        others = [i for i in range(n) if i not in set(A) and i != y]
        fast = delta_gain(pts[y], pts[A], pts[others], kernel)
        oracle = mi_exact(A + [y], pts, kernel) - mi_exact(A, pts, kernel)
        worst = max(worst, abs(fast - oracle))
    return SuiteResult(
        "delta_gain vs log-det MI", worst <= tol, f"max |error| = {worst:.3e} (tol {tol:g}, {instances} instances)",
        {"max_error": worst},
    )


def greedy_chain(V: CandidateSet, kernel: KernelModel, k: int) -> list[int]:
    state = PlanState()
    for _ in range(k):
        idx, _ = plan_baseline(state, V, kernel)
        state = state.add(idx)
    return list(state.chosen)


def check_greedy_bound(instances: int = 50, n: int = 8, k: int = 3, seed: int = 1) -> SuiteResult:
    """Greedy MI against the best of all size-k subsets."""
    rng = np.random.default_rng(seed)
    ratios, violations = [], 0
    for _ in range(instances):
        pts, kernel = random_instance(rng, n, n)
        V = CandidateSet(pts)
        greedy = mi_exact(greedy_chain(V, kernel, k), pts, kernel)
        best = max(mi_exact(list(c), pts, kernel) for c in itertools.combinations(range(n), k))
        ratios.append(greedy / best if best > 0 else 1.0)
        violations += greedy < GREEDY_BOUND * best
    ratios = np.array(ratios)
    return SuiteResult(
        "greedy vs exhaustive (1 - 1/e)",
        violations == 0,
        f"{violations} violations; ratio mean {ratios.mean():.4f}, min {ratios.min():.4f} ({instances} instances)",
        {"violations": violations, "mean_ratio": float(ratios.mean()), "min_ratio": float(ratios.min())},
    )


def check_sampler_moments(
    draws: int = 10_000, seed: int = 2, w1: float = 0.3, w2: float = 0.2, gamma: float = 0.01, d: float = 2.0
) -> SuiteResult:
    """Empirical covariance of sampled landings against the model covariance."""
    model = DeviationModel(w1, w2, gamma, loading_pos=(0.0, 0.0))
    target = np.array([d, 0.0])
    rng = np.random.default_rng(seed)
    landings = np.array([tuple(sample_landing(target, model, rng)) for _ in range(draws)])
    emp = np.cov(landings - target, rowvar=False)
    want = sigma_dev(target, model)
    allowed = np.maximum(0.1 * np.abs(want), 0.02)
    err = np.abs(emp - want)
    return SuiteResult(
        "landing covariance moments",
        bool(np.all(err <= allowed)),
        f"empirical {np.round(emp, 4).tolist()} vs model {np.round(want, 4).tolist()}",
        {"empirical": emp, "model": want, "abs_error": err},
    )


def check_expected_submodularity(pairs: int = 100, seed: int = 3, samples: int = 64, tol: float = 1e-6) -> SuiteResult:
    """Expected gain of y given A is no less than given B, for nested A within B."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(pairs):
        pts, kernel = random_instance(rng, 6, 16)
        n = len(pts)
        V = CandidateSet(pts)
        dev = DeviationModel(float(rng.uniform(0.2, 0.5)), float(rng.uniform(0.2, 0.5)), 0.01, (-3.0, 2.5))
        size_b = int(rng.integers(1, (n - 1) // 2 + 1))  # |B| < |V|/2
        order = rng.permutation(n)
        B = list(order[:size_b])
        A = B[: int(rng.integers(0, size_b))]
        y = int(order[size_b])
        shared = build_sample_set(pts, dev, samples, rng.integers(2**63))
        gains = []
        for chosen in (A, B):
            free, terms, weights = expected_gain_terms(PlanState(chosen), V, kernel, shared)
            gains.append(float(weights @ terms[:, free.index(y)]))
        worst = max(worst, gains[1] - gains[0])
    return SuiteResult(
        "expected gain diminishing returns",
        worst <= tol,
        f"max gain(y|B) - gain(y|A) = {worst:.3e} (tol {tol:g}, {pairs} pairs)",
        {"max_increase": float(worst)},
    )


def run_all(small: bool = False, seed: int = 0) -> list[SuiteResult]:
    if small:
        return [
            check_delta_oracle(40, seed),
            check_greedy_bound(10, seed=seed + 1),
            check_sampler_moments(10_000, seed + 2),
            check_expected_submodularity(20, seed + 3),
        ]
    return [
        check_delta_oracle(200, seed),
        check_greedy_bound(50, seed=seed + 1),
        check_sampler_moments(10_000, seed + 2),
        check_expected_submodularity(100, seed + 3),
    ]
