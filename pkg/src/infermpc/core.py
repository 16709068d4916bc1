"""Finite-horizon optimal control problems with deterministic dynamics.

A control sequence is a plain ``(T, n_u)`` float array; a batch of them is
``(K, T, n_u)``. Dynamics and cost callables must broadcast over leading
axes, so the same :class:`Problem` serves single rollouts and batched ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalDomainError, ParameterError, ShapeError

Dynamics = Callable[[np.ndarray, np.ndarray], np.ndarray]
StageCost = Callable[[np.ndarray, np.ndarray, int], np.ndarray]
TerminalCost = Callable[[np.ndarray], np.ndarray]

# finite stand-in for an indicator constraint; keeps exp(-J/lambda) well defined
CONSTRAINT_PENALTY = 1e6


def zero_terminal(x: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(x)[:-1])


@dataclass(frozen=True)
class Problem:
    """min_u sum_t stage_cost(x_t, u_t, t) + terminal_cost(x_T) s.t. x_{t+1} = dynamics(x_t, u_t).

    ``input_lower``/``input_upper`` may contain infinities. Inputs are clamped
    to these bounds before they reach the dynamics or the costs.
    """

    horizon: int
    state_dim: int
    input_dim: int
    dynamics: Dynamics
    stage_cost: StageCost
    terminal_cost: TerminalCost = zero_terminal
    input_lower: np.ndarray | None = None
    input_upper: np.ndarray | None = None

    def __post_init__(self):
        if self.horizon < 1 or self.state_dim < 1 or self.input_dim < 1:
            raise ParameterError("horizon, state_dim and input_dim must all be >= 1")
        lo = np.full(self.input_dim, -np.inf) if self.input_lower is None else self.input_lower
        hi = np.full(self.input_dim, np.inf) if self.input_upper is None else self.input_upper
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (self.input_dim,)).copy()
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (self.input_dim,)).copy()
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ParameterError("input bounds must satisfy lower <= upper elementwise")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "input_lower", lo)
        object.__setattr__(self, "input_upper", hi)

    @property
    def input_shape(self) -> tuple[int, int]:
        return (self.horizon, self.input_dim)

    def clamp(self, u: np.ndarray) -> np.ndarray:
        return np.clip(u, self.input_lower, self.input_upper)


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray
    inputs: np.ndarray
    total_cost: float


def _check_x0(problem: Problem, x0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.state_dim,):
        raise ShapeError(f"x0 must have shape ({problem.state_dim},), got {x0.shape}")
    return x0


def _check_inputs(problem: Problem, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != problem.input_shape:
        raise ShapeError(f"control sequence must have shape {problem.input_shape}, got {u.shape}")
    return u


def rollout(problem: Problem, x0, u) -> Trajectory:
    """Clamp ``u`` and simulate it from ``x0``.

    Raises :class:`NumericalDomainError` naming the first step whose state or
    stage cost is not finite.
    """
    x0 = _check_x0(problem, x0)
    u = problem.clamp(_check_inputs(problem, u))
    states = np.empty((problem.horizon + 1, problem.state_dim))
    states[0] = x0
    for t in range(problem.horizon):
        nxt = np.asarray(problem.dynamics(states[t], u[t]), dtype=float)
        if not np.all(np.isfinite(nxt)):
            raise NumericalDomainError(f"dynamics produced a non-finite state at step {t}", step=t)
        states[t + 1] = nxt
    traj = Trajectory(states=states, inputs=u, total_cost=0.0)
    return Trajectory(states=states, inputs=u, total_cost=trajectory_cost(problem, traj))


def trajectory_cost(problem: Problem, traj: Trajectory) -> float:
    states = np.asarray(traj.states, dtype=float)
    inputs = np.asarray(traj.inputs, dtype=float)
    if states.shape != (problem.horizon + 1, problem.state_dim):
        raise ShapeError(f"states must have shape {(problem.horizon + 1, problem.state_dim)}, got {states.shape}")
    _check_inputs(problem, inputs)
    total = 0.0
    for t in range(problem.horizon):
        c = float(problem.stage_cost(states[t], inputs[t], t))
        if not np.isfinite(c):
            raise NumericalDomainError(f"stage cost is not finite at step {t}", step=t)
        total += c
    term = float(problem.terminal_cost(states[-1]))
    if not np.isfinite(term):
        raise NumericalDomainError("terminal cost is not finite", step=problem.horizon)
    return total + term


def batch_costs(problem: Problem, x0, inputs: np.ndarray) -> np.ndarray:
    """Trajectory costs of an already clamped ``(K, T, n_u)`` batch.

    Samples whose rollout leaves the finite reals get cost ``+inf`` instead
    of raising; the caller decides what to do with them. Accumulation runs
    over time steps with elementwise ops only, so a sample's cost does not
    depend on which other samples share the batch.
    """
    x0 = _check_x0(problem, x0)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 3 or inputs.shape[1:] != problem.input_shape:
        raise ShapeError(f"batch must have shape (K, {problem.horizon}, {problem.input_dim}), got {inputs.shape}")
    k = inputs.shape[0]
    x = np.broadcast_to(x0, (k, problem.state_dim))
    total = np.zeros(k)
    with np.errstate(all="ignore"):
        for t in range(problem.horizon):
            ut = inputs[:, t, :]
            total = total + problem.stage_cost(x, ut, t)
            x = problem.dynamics(x, ut)
        total = total + problem.terminal_cost(x)
        bad = ~np.isfinite(total) | ~np.all(np.isfinite(x), axis=-1)
    total[bad] = np.inf
    return total
