"""Point-mass environments and the planner problems built from them.

State is ``[px, py, vx, vy]``, input is acceleration ``[ax, ay]``; one step
is symplectic Euler with ``dt``. A :class:`Scenario` is plain data, so a run
can be rebuilt from its logged snapshot.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from ..core import CONSTRAINT_PENALTY, Problem
from ..errors import ConfigError

COLLISION_PENALTY = CONSTRAINT_PENALTY


def point_mass_step(x, u, dt: float = 0.1, gain: float = 1.0):
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v = x[..., 2:] + dt * gain * u
    p = x[..., :2] + dt * v
    return np.concatenate([p, v], axis=-1)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to build an :class:`Environment` and its planner problem.

    ``plant_gain`` scales the plant's acceleration only, so values other than
    1 introduce model mismatch. Obstacles are ``(cx, cy, radius)`` triples.
    """

    name: str = "benchmark"
    start: tuple[float, float] = (0.0, 0.0)
    goal: tuple[float, float] = (5.0, 0.0)
    obstacles: tuple[tuple[float, float, float], ...] = ((2.5, 0.4, 0.8),)
    workspace: tuple[float, float, float, float] = (-1.0, 6.0, -3.0, 3.0)
    max_steps: int = 120
    goal_radius: float = 0.2
    process_noise_std: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    dt: float = 0.1
    plant_gain: float = 1.0
    horizon: int = 30
    input_limit: float = 3.0
    safety_margin: float = 0.1
    w_goal: float = 1.0
    w_velocity: float = 0.1
    w_input: float = 0.1
    w_terminal: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "goal", tuple(float(v) for v in self.goal))
        object.__setattr__(self, "obstacles", tuple(tuple(float(v) for v in ob) for ob in self.obstacles))
        object.__setattr__(self, "workspace", tuple(float(v) for v in self.workspace))
        object.__setattr__(self, "process_noise_std", tuple(float(v) for v in self.process_noise_std))
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if len(self.process_noise_std) != 4 or min(self.process_noise_std) < 0:
            raise ConfigError("process_noise_std needs 4 nonnegative entries")
        for cx, cy, r in self.obstacles:
            if r <= 0:
                raise ConfigError("obstacle radius must be positive")
            for name, pt in (("start", self.start), ("goal", self.goal)):
                if np.hypot(pt[0] - cx, pt[1] - cy) <= r:
                    raise ConfigError(f"{name} {pt} lies inside obstacle ({cx}, {cy}, {r})")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        return cls(**data)

    def environment(self) -> "Environment":
        return Environment(
            plant=partial(point_mass_step, dt=self.dt, gain=self.plant_gain),
            initial_state=np.array([*self.start, 0.0, 0.0]),
            goal=np.array(self.goal),
            obstacles=tuple((np.array(ob[:2]), ob[2]) for ob in self.obstacles),
            workspace=self.workspace,
            max_steps=self.max_steps,
            process_noise_std=np.array(self.process_noise_std),
            goal_radius=self.goal_radius,
            scenario=self,
        )

    def problem(self) -> Problem:
        goal = np.array(self.goal)
        centers = np.array([ob[:2] for ob in self.obstacles]).reshape(-1, 2)
        radii = np.array([ob[2] + self.safety_margin for ob in self.obstacles])
        xmin, xmax, ymin, ymax = self.workspace

        def penalty(p):
            hit = np.zeros(p.shape[:-1], dtype=bool)
            for c, r in zip(centers, radii):
                d = p - c
                hit |= d[..., 0] ** 2 + d[..., 1] ** 2 <= r * r
            hit |= (p[..., 0] < xmin) | (p[..., 0] > xmax) | (p[..., 1] < ymin) | (p[..., 1] > ymax)
            return COLLISION_PENALTY * hit

        def stage(x, u, t):
            p = x[..., :2] - goal
            v = x[..., 2:]
            return (
                self.w_goal * np.sum(p * p, axis=-1)
                + self.w_velocity * np.sum(v * v, axis=-1)
                + self.w_input * np.sum(u * u, axis=-1)
                + penalty(x[..., :2])
            )

        def terminal(x):
            p = x[..., :2] - goal
            v = x[..., 2:]
            return self.w_terminal * np.sum(p * p, axis=-1) + self.w_velocity * np.sum(v * v, axis=-1) + penalty(x[..., :2])

        return Problem(
            horizon=self.horizon,
            state_dim=4,
            input_dim=2,
            dynamics=partial(point_mass_step, dt=self.dt),
            stage_cost=stage,
            terminal_cost=terminal,
            input_lower=np.full(2, -self.input_limit),
            input_upper=np.full(2, self.input_limit),
        )


@dataclass(frozen=True)
class Environment:
    plant: Callable[[np.ndarray, np.ndarray], np.ndarray]
    initial_state: np.ndarray
    goal: np.ndarray
    obstacles: tuple[tuple[np.ndarray, float], ...]
    workspace: tuple[float, float, float, float]
    max_steps: int
    process_noise_std: np.ndarray
    goal_radius: float = 0.2
    scenario: Scenario | None = field(default=None, compare=False)

    def collided(self, x) -> bool:
        p = np.asarray(x)[:2]
        return any(float(np.hypot(*(p - c))) <= r for c, r in self.obstacles)

    def distance_to_goal(self, x) -> float:
        return float(np.hypot(*(np.asarray(x)[:2] - self.goal)))


def benchmark_scenario(**overrides) -> Scenario:
    """One obstacle between start and goal, nudged off the start-goal line."""
    return Scenario(**overrides)


def corridor_scenario(offset_radii: float = 0.0, **overrides) -> Scenario:
    """Symmetric corridor with an obstacle on the start-goal line.

    ``offset_radii`` shifts the obstacle sideways (positive = left, +y) by
    that many obstacle radii.
    """
    radius = overrides.pop("obstacle_radius", 0.6)
    params = dict(
        name="corridor",
        start=(0.0, 0.0),
        goal=(6.0, 0.0),
        obstacles=((3.0, offset_radii * radius, radius),),
        workspace=(-1.0, 7.0, -2.0, 2.0),
        max_steps=100,
        horizon=20,
    )
    params.update(overrides)
    return Scenario(**params)
