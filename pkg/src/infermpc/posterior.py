"""Exact optimal control distributions for scalar, single-step problems.

On a uniform grid the optimal control distribution is

    pi*(u) = exp(-J(u) / lam) * N(u; prior_mean, prior_std**2) / Z

and everything else here (moments, entropy, expected cost, mode count,
forward KL to a Gaussian) is trapezoidal quadrature over that grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import CONSTRAINT_PENALTY, Problem
from .errors import ConfigError, DegenerateDensityError, ParameterError

CostFn = Callable[[np.ndarray], np.ndarray]

PRIOR_COVERAGE_SIGMAS = 6.0


def sinusoid_cost(u):
    """The multi-well example cost 0.6 u^2 sin(5 pi u)."""
    u = np.asarray(u, dtype=float)
    return 0.6 * u**2 * np.sin(5.0 * np.pi * u)


def constant_cost(u, value: float = 1.0):
    return np.full(np.shape(u), float(value))


def quadratic_cost(u):
    return np.asarray(u, dtype=float) ** 2


COSTS: dict[str, CostFn] = {
    "sinusoid": sinusoid_cost,
    "constant": constant_cost,
    "quadratic": quadratic_cost,
}


def get_cost(name: str) -> CostFn:
    try:
        return COSTS[name]
    except KeyError:
        raise ConfigError(f"unknown cost {name!r}; choose from {sorted(COSTS)}") from None


@dataclass(frozen=True)
class Grid1D:
    lo: float = -3.0
    hi: float = 3.0
    n: int = 4801

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo < self.hi):
            raise ConfigError(f"grid needs finite lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.n) < 2:
            raise ConfigError(f"grid needs at least 2 points, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.n))


@dataclass(frozen=True)
class GridDensity:
    """A normalized density sampled on a grid, plus the pieces it was built from.

    ``normalizer`` is Z for the min-shifted Boltzmann factor, i.e.
    integral of exp(-(J - min J)/lam) * prior over the grid. It can underflow
    for very peaked problems; ``log_normalizer`` cannot.
    """

    grid: Grid1D
    values: np.ndarray
    normalizer: float
    log_normalizer: float
    costs: np.ndarray
    prior_pdf: np.ndarray
    boltzmann: np.ndarray

    @property
    def u(self) -> np.ndarray:
        return self.grid.points


def gaussian_pdf(u, mean: float, std: float) -> np.ndarray:
    z = (np.asarray(u, dtype=float) - mean) / std
    return np.exp(-0.5 * z * z) / (std * math.sqrt(2.0 * math.pi))


def _gaussian_logpdf(u, mean: float, std: float) -> np.ndarray:
    z = (np.asarray(u, dtype=float) - mean) / std
    return -0.5 * z * z - math.log(std) - 0.5 * math.log(2.0 * math.pi)


def grid_posterior(
    cost_fn: CostFn,
    prior_mean: float,
    prior_std: float,
    lam: float,
    grid: Grid1D,
    truncate: bool = False,
) -> GridDensity:
    """Evaluate the optimal control distribution on ``grid``.

    With ``truncate=False`` the grid must extend six prior standard deviations
    on both sides of the prior mean. With ``truncate=True`` the grid is the
    admissible input interval itself and the posterior is defined on it
    (the prior is implicitly truncated), so no coverage check applies.
    """
    if not (prior_std > 0 and np.isfinite(prior_std)):
        raise ParameterError(f"prior_std must be positive, got {prior_std}")
    if not (lam > 0 and np.isfinite(lam)):
        raise ParameterError(f"lambda must be positive and finite, got {lam}")
    if not truncate:
        reach = PRIOR_COVERAGE_SIGMAS * prior_std
        if prior_mean - grid.lo < reach or grid.hi - prior_mean < reach:
            raise ConfigError(
                f"grid [{grid.lo}, {grid.hi}] does not cover prior N({prior_mean}, {prior_std}^2) "
                f"to {PRIOR_COVERAGE_SIGMAS:g} sigma; widen it or pass truncate=True"
            )
    u = grid.points
    costs = np.asarray(cost_fn(u), dtype=float)
    if costs.shape != u.shape or not np.all(np.isfinite(costs)):
        raise ConfigError("cost function must be finite on the whole grid")

    shifted = (costs - costs.min()) / lam
    boltzmann = np.exp(-shifted)
    log_unnorm = -shifted + _gaussian_logpdf(u, prior_mean, prior_std)
    peak = log_unnorm.max()
    rel = np.exp(log_unnorm - peak)
    mass = np.trapezoid(rel, u)
    if np.count_nonzero(rel > 1e-300) < 3 or not mass > 0:
        raise DegenerateDensityError(
            f"posterior collapsed onto fewer than 3 grid points at lambda={lam}; "
            "increase lambda or refine the grid"
        )
    log_z = float(peak + math.log(mass))
    return GridDensity(
        grid=grid,
        values=rel / mass,
        normalizer=math.exp(log_z) if log_z < 709.0 else math.inf,
        log_normalizer=log_z,
        costs=costs,
        prior_pdf=gaussian_pdf(u, prior_mean, prior_std),
        boltzmann=boltzmann,
    )


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    entropy: float


def _plogp(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def posterior_moments(d: GridDensity) -> Moments:
    u, p = d.u, d.values
    mean = float(np.trapezoid(u * p, u))
    var = float(np.trapezoid((u - mean) ** 2 * p, u))
    entropy = float(-np.trapezoid(_plogp(p), u))
    return Moments(mean=mean, variance=max(var, 0.0), entropy=entropy)


def expected_cost(d: GridDensity) -> float:
    return float(np.trapezoid(d.costs * d.values, d.u))


def count_modes(d: GridDensity, rel_threshold: float = 0.05) -> int:
    """Interior strict local maxima at least ``rel_threshold`` times the peak.

    A density whose only maximum sits on the grid boundary counts as one mode.
    """
    if not 0 < rel_threshold < 1:
        raise ParameterError("rel_threshold must lie in (0, 1)")
    v = d.values
    mid = v[1:-1]
    is_peak = (mid > v[:-2]) & (mid > v[2:]) & (mid >= rel_threshold * v.max())
    return max(int(np.count_nonzero(is_peak)), 1)


def kl_forward(d: GridDensity, g_mean: float, g_std: float) -> float:
    """KL(pi* || N(g_mean, g_std**2)) by quadrature on the density's grid."""
    if not g_std > 0:
        raise ParameterError("g_std must be positive")
    u, p = d.u, d.values
    integrand = np.zeros_like(p)
    pos = p > 0
    integrand[pos] = p[pos] * (np.log(p[pos]) - _gaussian_logpdf(u[pos], g_mean, g_std))
    return float(np.trapezoid(integrand, u))


def static_problem(cost_fn: CostFn, lo: float = -math.inf, hi: float = math.inf, penalty: float = CONSTRAINT_PENALTY) -> Problem:
    """T=1 problem whose state never changes and whose cost is ``cost_fn(u)``.

    The admissible interval [lo, hi] is enforced as a finite penalty rather
    than by clamping, so the sampled estimate targets the posterior restricted
    to the interval (what :func:`grid_posterior` computes with
    ``truncate=True``) instead of piling clamped mass onto the bounds.
    """

    def stage(x, u, t):
        v = np.asarray(u, dtype=float)[..., 0]
        inside = (v >= lo) & (v <= hi)
        with np.errstate(all="ignore"):
            c = cost_fn(np.clip(v, lo, hi))
        return np.where(inside, c, penalty)

    return Problem(horizon=1, state_dim=1, input_dim=1, dynamics=lambda x, u: x, stage_cost=stage)
