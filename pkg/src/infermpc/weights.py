"""Boltzmann (softmin) importance weights over a batch of trajectory costs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalDomainError, ParameterError, ShapeError


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    ess: float


def softmax_weights(costs, lam: float) -> WeightVector:
    """w_k proportional to exp(-(J_k - min J) / lam).

    Subtracting the minimum makes the largest exponent exactly zero, so
    overflow cannot happen and adding a constant to every cost leaves the
    result bit-identical.
    """
    costs = np.asarray(costs, dtype=float)
    if costs.ndim != 1 or costs.size < 1:
        raise ShapeError("costs must be a non-empty vector")
    if not np.all(np.isfinite(costs)):
        raise NumericalDomainError("softmax weights need finite costs")
    if not (lam > 0 and np.isfinite(lam)):
        raise ParameterError(f"temperature must be positive and finite, got {lam}")
    shifted = costs - costs.min()
    w = np.exp(-shifted / lam)
    w = w / w.sum()
    return WeightVector(weights=w, ess=float(1.0 / np.sum(w * w)))


def weighted_mean(samples, w: WeightVector | np.ndarray) -> np.ndarray:
    """Convex combination sum_k w_k * samples[k] along the first axis."""
    samples = np.asarray(samples, dtype=float)
    weights = w.weights if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    if samples.shape[0] != weights.shape[0]:
        raise ShapeError(f"{samples.shape[0]} samples but {weights.shape[0]} weights")
    wb = weights.reshape((-1,) + (1,) * (samples.ndim - 1))
    return np.sum(wb * samples, axis=0)


def argmin_index(costs) -> int:
    """Index of the smallest cost, ties going to the lowest index."""
    return int(np.argmin(np.asarray(costs, dtype=float)))
