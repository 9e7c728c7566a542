"""Gaussian-process sensor model: RBF covariances, conditional variances and MI.

Observations at ground positions are jointly Gaussian with covariance given by
an RBF kernel of the positions. Means never enter mutual information, so
``KernelModel.prior_mean`` is carried for completeness only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateInputError

__all__ = [
    "Position",
    "KernelModel",
    "CovMatrix",
    "as_points",
    "kernel_cov",
    "kernel_matrix",
    "build_cov",
    "conditional_variance",
    "batch_conditional_variance",
    "delta_gain",
    "mi_exact",
]


@dataclass(frozen=True)
class Position:
    """Ground coordinate in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite position ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def __iter__(self):
        yield self.x
        yield self.y


PointLike = Union[Position, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class KernelModel:
    """RBF kernel with bandwidth ``phi`` (m) and diagonal ``jitter``."""

    phi: float = 1.5
    jitter: float = 1e-9
    prior_mean: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.phi) and self.phi > 0):
            raise ValueError(f"phi must be positive, got {self.phi}")
        if not (math.isfinite(self.jitter) and self.jitter >= 0):
            raise ValueError(f"jitter must be nonnegative, got {self.jitter}")

    @property
    def prior_variance(self) -> float:
        return 1.0 + self.jitter


@dataclass(frozen=True)
class CovMatrix:
    labels: tuple
    entries: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.labels)


def as_points(points) -> np.ndarray:
    """Coerce a position or a sequence of positions to a float array ``(..., 2)``."""
    if isinstance(points, Position):
        arr = points.as_array()
    elif isinstance(points, (list, tuple)) and points and isinstance(points[0], Position):
        arr = np.array([p.as_array() for p in points])
    else:
        arr = np.asarray(points, dtype=float)
        if arr.size == 0:
            return arr.reshape(0, 2)
    if arr.shape[-1] != 2:
        raise ValueError(f"expected trailing dimension 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite position")
    return arr


def kernel_matrix(a: np.ndarray, b: np.ndarray, model: KernelModel) -> np.ndarray:
    """Pairwise kernel values between ``a (..., n, 2)`` and ``b (..., m, 2)``, no jitter."""
    diff = a[..., :, None, :] - b[..., None, :, :]
    sq = np.einsum("...i,...i->...", diff, diff)
    return np.exp(-sq / (2.0 * model.phi**2))


def kernel_cov(a: PointLike, b: PointLike, model: KernelModel) -> float:
    pa, pb = as_points(a), as_points(b)
    sq = float(np.sum((pa - pb) ** 2))
    return math.exp(-sq / (2.0 * model.phi**2))


def build_cov(positions, model: KernelModel, labels=None) -> CovMatrix:
    """Covariance matrix of observations at ``positions`` with jitter on the diagonal."""
    pts = as_points(positions)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("build_cov needs a non-empty list of positions")
    if model.jitter == 0 and len(pts) > 1:
        d = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        d[np.diag_indices_from(d)] = np.inf
        if np.min(d) == 0.0:
            raise DegenerateInputError("coincident positions with zero jitter give a singular covariance")
    entries = kernel_matrix(pts, pts, model)
    entries[np.diag_indices_from(entries)] += model.jitter
    if labels is None:
        labels = tuple(tuple(p) for p in pts.tolist())
    return CovMatrix(tuple(labels), entries)


def _cholesky(mat: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise DegenerateInputError("conditioning covariance is not positive definite") from exc


def batch_conditional_variance(targets, conditioning, model: KernelModel) -> np.ndarray:
    """Posterior variances of ``targets (..., m, 2)`` given ``conditioning (..., k, 2)``.

    Leading dimensions broadcast; returns ``(..., m)``.
    """
    targets = np.asarray(targets, dtype=float)
    conditioning = np.asarray(conditioning, dtype=float)
    batch = np.broadcast_shapes(targets.shape[:-2], conditioning.shape[:-2])
    prior = np.full(batch + targets.shape[-2:-1], model.prior_variance)
    k = conditioning.shape[-2]
    if k == 0:
        return prior
    kaa = kernel_matrix(conditioning, conditioning, model)
    kaa = kaa + model.jitter * np.eye(k)
    chol = _cholesky(kaa)
    kay = kernel_matrix(conditioning, targets, model)
    w = np.linalg.solve(chol, kay)
    return prior - np.einsum("...km,...km->...m", w, w)


def conditional_variance(target: PointLike, conditioning, model: KernelModel) -> float:
    """Variance at ``target`` given observations at ``conditioning`` (may be empty)."""
    t = as_points(target).reshape(1, 2)
    cond = as_points(conditioning).reshape(-1, 2)
    if model.jitter == 0 and len(cond) > 1:
        build_cov(cond, model)
    return float(batch_conditional_variance(t, cond, model)[0])


def delta_gain(candidate: PointLike, selected, others, model: KernelModel) -> float:
    """MI increase from adding ``candidate`` to ``selected``.

    ``others`` are the remaining candidates, excluding both the selected set
    and the candidate itself.
    """
    num = conditional_variance(candidate, selected, model)
    den = conditional_variance(candidate, others, model)
    if num <= 0 or den <= 0:
        raise DegenerateInputError(f"conditional variance underflow ({num:.3e}, {den:.3e})")
    return 0.5 * math.log(num / den)


def _logdet(pts: np.ndarray, model: KernelModel) -> float:
    sign, val = np.linalg.slogdet(build_cov(pts, model).entries)
    if sign <= 0:
        raise DegenerateInputError("covariance determinant is not positive")
    return float(val)


def mi_exact(selected: Sequence[int], all_candidates, model: KernelModel) -> float:
    """Mutual information between observations at ``selected`` and the rest.

    ``selected`` indexes into ``all_candidates``. Computed from Gaussian
    entropies as H(A) + H(rest) - H(all); the (2 pi e)^k factors cancel.
    Returns 0 when either side is empty.
    """
    pts = as_points(all_candidates).reshape(-1, 2)
    idx = sorted(set(int(i) for i in selected))
    if len(idx) != len(list(selected)):
        raise ValueError("selected indices repeat")
    if any(i < 0 or i >= len(pts) for i in idx):
        raise ValueError("selected index out of range")
    rest = [i for i in range(len(pts)) if i not in set(idx)]
    if not idx or not rest:
        return 0.0
    return 0.5 * (_logdet(pts[idx], model) + _logdet(pts[rest], model) - _logdet(pts, model))
