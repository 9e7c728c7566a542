"""Distance-dependent landing deviation of dropped sensors.

A sensor released above target t lands at t + e, with e ~ N(0, S(d)) and

    S(d) = [[w1*d + gamma, gamma], [gamma, w2*d + gamma]]

where d is the distance from the loading position to t. At d = 0 (or w1 = w2 = 0)
S(d) is singular, so a small ``regularization`` is added to the diagonal by
default; set it to 0 for the strict behaviour.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError
from .gp import Position, as_points

__all__ = [
    "DeviationModel",
    "DeviationSampleSet",
    "sigma_dev",
    "dev_cholesky",
    "sample_landing",
    "build_sample_set",
    "build_mesh_sample_set",
    "joint_offsets",
]


@dataclass(frozen=True)
class DeviationModel:
    w1: float = 0.3
    w2: float = 0.2
    gamma: float = 0.01
    loading_pos: Position = Position(-3.0, 2.5)
    regularization: float = 1e-6

    def __post_init__(self):
        if not (self.w1 >= 0 and self.w2 >= 0):
            raise ValueError(f"deviation weights must be nonnegative, got ({self.w1}, {self.w2})")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.regularization >= 0:
            raise ValueError("regularization must be nonnegative")
        if not isinstance(self.loading_pos, Position):
            object.__setattr__(self, "loading_pos", Position(*self.loading_pos))


def sigma_dev(target, model: DeviationModel) -> np.ndarray:
    """Landing-offset covariance for a drop at ``target``."""
    t = as_points(target).reshape(2)
    d = math.hypot(t[0] - model.loading_pos.x, t[1] - model.loading_pos.y)
    g, rho = model.gamma, model.regularization
    cov = np.array([[model.w1 * d + g + rho, g], [g, model.w2 * d + g + rho]])
    det = cov[0, 0] * cov[1, 1] - g * g
    if det <= 1e-12 * cov[0, 0] * cov[1, 1]:
        raise DegenerateInputError(
            f"deviation covariance is singular at d={d:.6g} (det={det:.3e}); enable regularization"
        )
    return cov


def dev_cholesky(target, model: DeviationModel) -> np.ndarray:
    return np.linalg.cholesky(sigma_dev(target, model))


def sample_landing(target, model: DeviationModel, rng: np.random.Generator) -> Position:
    """Draw one true landing position for a drop at ``target``."""
    t = as_points(target).reshape(2)
    z = rng.standard_normal(2)
    x, y = t + dev_cholesky(t, model) @ z
    return Position(float(x), float(y))


@dataclass(frozen=True)
class DeviationSampleSet:
    """Weighted landing offsets, one row of samples per target.

    ``offsets`` has shape ``(n_targets, n_samples, 2)`` and ``weights`` shape
    ``(n_targets, n_samples)``. For ``kind == "mc"`` the s-th offsets of all
    targets together form the s-th joint sample; for ``kind == "mesh"`` joint
    samples are the tensor product of per-target nodes.
    """

    offsets: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    seed: object = None
    kind: str = "mc"

    def __post_init__(self):
        if self.offsets.ndim != 3 or self.offsets.shape[-1] != 2:
            raise ValueError(f"offsets must be (n, s, 2), got {self.offsets.shape}")
        if self.weights.shape != self.offsets.shape[:2]:
            raise ValueError("weights shape does not match offsets")
        if self.offsets.shape[1] < 1:
            raise ValueError("at least one sample per target is required")
        if np.any(self.weights < 0) or np.any(np.abs(self.weights.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("weights must be nonnegative and sum to 1 per target")

    @property
    def n_samples(self) -> int:
        return self.offsets.shape[1]


def build_sample_set(targets, model: DeviationModel, samples_per_config: int, seed) -> DeviationSampleSet:
    """Monte Carlo offsets, independent across targets, uniform weights.

    With a single sample the offset is the distribution mean (zero).
    """
    if samples_per_config < 1:
        raise ValueError("samples_per_config must be >= 1")
    pts = as_points(targets).reshape(-1, 2)
    n, s = len(pts), int(samples_per_config)
    weights = np.full((n, s), 1.0 / s)
    if s == 1:
        return DeviationSampleSet(np.zeros((n, 1, 2)), weights, seed, "mc")
    chols = np.stack([dev_cholesky(p, model) for p in pts])
    z = np.random.default_rng(seed).standard_normal((n, s, 2))
    offsets = np.einsum("nij,nsj->nsi", chols, z)
    return DeviationSampleSet(offsets, weights, seed, "mc")


def build_mesh_sample_set(targets, model: DeviationModel, points_per_axis: int = 5) -> DeviationSampleSet:
    """Deterministic Gauss-Hermite tensor mesh per target (``points_per_axis**2`` nodes)."""
    nodes, w = np.polynomial.hermite.hermgauss(points_per_axis)
    nodes, w = nodes * math.sqrt(2.0), w / math.sqrt(math.pi)
    z = np.array([(a, b) for a in nodes for b in nodes])
    wz = np.array([wa * wb for wa in w for wb in w])
    wz = wz / wz.sum()
    pts = as_points(targets).reshape(-1, 2)
    offsets = np.stack([z @ dev_cholesky(p, model).T for p in pts])
    weights = np.tile(wz, (len(pts), 1))
    return DeviationSampleSet(offsets, weights, None, "mesh")


def joint_offsets(samples: DeviationSampleSet, indices) -> tuple[np.ndarray, np.ndarray]:
    """Joint offsets ``(J, len(indices), 2)`` and weights ``(J,)`` for the given targets."""
    idx = list(indices)
    if samples.kind == "mc":
        offs = np.transpose(samples.offsets[idx], (1, 0, 2))
        return offs, samples.weights[idx[0]].copy() if idx else np.array([1.0])
    if len(idx) > 2:
        raise ValueError("tensor mesh is limited to joint samples over at most 2 sensors")
    m = samples.n_samples
    combos = list(itertools.product(range(m), repeat=len(idx)))
    offs = np.array([[samples.offsets[i, c] for i, c in zip(idx, combo)] for combo in combos])
    wts = np.array([np.prod([samples.weights[i, c] for i, c in zip(idx, combo)]) for combo in combos])
    return offs.reshape(len(combos), len(idx), 2), wts
