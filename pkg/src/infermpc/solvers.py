"""Single-pass sampling planners: MPPI and random shooting.

Both share one pipeline: draw K sequences from N(prior_mean, diag(std**2))
using per-sample counter streams, clamp them, roll them out, then reduce.
MPPI returns the softmax-weighted average of the samples; random shooting
returns the cheapest one.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import Problem, Trajectory, batch_costs, rollout
from .distributions import GaussianSequencePolicy, SeedSpec, WarmStartFill, sample_indices
from .errors import ParameterError, ShapeError, SolverFailure
from .weights import argmin_index, softmax_weights, weighted_mean


@dataclass(frozen=True)
class SolverConfig:
    """Sampling hyper-parameters. ``threads`` only changes how work is split."""

    K: int = 1024
    lam: float = 1.0
    std: tuple[float, ...] = (1.0,)
    warm_start_fill: WarmStartFill = WarmStartFill.REPEAT_LAST
    seed: SeedSpec = field(default_factory=SeedSpec)
    threads: int = 1

    def __post_init__(self):
        if int(self.K) < 1:
            raise ParameterError(f"K must be >= 1, got {self.K}")
        if not (self.lam > 0 and np.isfinite(self.lam)):
            raise ParameterError(f"lambda must be positive and finite, got {self.lam}")
        std = tuple(float(s) for s in np.atleast_1d(self.std))
        if not all(s > 0 and np.isfinite(s) for s in std):
            raise ParameterError("std entries must be strictly positive")
        if int(self.threads) < 1:
            raise ParameterError("threads must be >= 1")
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "std", std)
        object.__setattr__(self, "warm_start_fill", WarmStartFill(self.warm_start_fill))
        object.__setattr__(self, "threads", int(self.threads))

    def with_stream(self, stream_id: int) -> "SolverConfig":
        return replace(self, seed=self.seed.with_stream(stream_id))


@dataclass(frozen=True)
class SolveReport:
    solution: np.ndarray
    solution_cost: float
    trajectory: Trajectory
    batch_costs: np.ndarray
    samples: np.ndarray
    ess: float
    min_cost: float
    mean_cost: float
    wall_time: float


def _evaluate(problem: Problem, x0, policy: GaussianSequencePolicy, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    def chunk(idx: np.ndarray):
        u = problem.clamp(sample_indices(policy, cfg.seed, idx))
        return u, batch_costs(problem, x0, u)

    if cfg.threads == 1 or cfg.K < 2 * cfg.threads:
        return chunk(np.arange(cfg.K))
    bounds = np.linspace(0, cfg.K, cfg.threads + 1).astype(int)
    parts = [np.arange(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(chunk, parts))
    return np.concatenate([r[0] for r in results]), np.concatenate([r[1] for r in results])


def _solve(problem: Problem, x0, prior_mean, cfg: SolverConfig, reduce: Callable) -> SolveReport:
    start = time.perf_counter()
    prior_mean = np.asarray(prior_mean, dtype=float)
    if prior_mean.shape != problem.input_shape:
        raise ShapeError(f"prior_mean must have shape {problem.input_shape}, got {prior_mean.shape}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.state_dim,) or not np.all(np.isfinite(x0)):
        raise ShapeError(f"x0 must be a finite vector of length {problem.state_dim}")
    if len(cfg.std) not in (1, problem.input_dim):
        raise ShapeError(f"std must have 1 or {problem.input_dim} entries, got {len(cfg.std)}")

    policy = GaussianSequencePolicy(prior_mean, np.asarray(cfg.std))
    samples, costs = _evaluate(problem, x0, policy, cfg)
    finite = np.isfinite(costs)
    if not finite.any():
        raise SolverFailure("every sampled trajectory has a non-finite cost")

    solution, ess = reduce(samples, costs, finite)
    traj = rollout(problem, x0, solution)
    return SolveReport(
        solution=traj.inputs,
        solution_cost=traj.total_cost,
        trajectory=traj,
        batch_costs=costs,
        samples=samples,
        ess=ess,
        min_cost=float(costs[finite].min()),
        mean_cost=float(costs[finite].mean()),
        wall_time=time.perf_counter() - start,
    )


def mppi_step(problem: Problem, x0, prior_mean, cfg: SolverConfig) -> SolveReport:
    """One MPPI update: softmax(-J/lambda)-weighted mean of K prior samples.

    Samples with non-finite cost get zero weight.
    """

    def reduce(samples, costs, finite):
        if finite.all():
            w = softmax_weights(costs, cfg.lam)
            return weighted_mean(samples, w), w.ess
        w = softmax_weights(costs[finite], cfg.lam)
        return weighted_mean(samples[finite], w), w.ess

    return _solve(problem, x0, prior_mean, cfg, reduce)


def random_shooting_step(problem: Problem, x0, prior_mean, cfg: SolverConfig) -> SolveReport:
    """Return the cheapest of K prior samples (ties: lowest index)."""

    def reduce(samples, costs, finite):
        return samples[argmin_index(costs)].copy(), 1.0

    return _solve(problem, x0, prior_mean, cfg, reduce)


PLANNERS = {"mppi": mppi_step, "random_shooting": random_shooting_step}
