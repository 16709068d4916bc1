"""Left/right decision statistics on the symmetric corridor."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..distributions import SeedSpec, derive_seed
from ..solvers import SolverConfig
from .envs import Scenario
from .loop import Outcome, RunLog, run_scenario


def pass_side(log: RunLog, obstacle: tuple[float, float, float]) -> str | None:
    """'left' or 'right' of the obstacle where the path crosses its x position.

    Left means +y for travel in +x. ``None`` if the run never crossed.
    """
    cx, cy, _ = obstacle
    pts = [r.state[:2] for r in log.records] + [log.final_state[:2]]
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        if x0 < cx <= x1:
            y = y0 + (y1 - y0) * (cx - x0) / (x1 - x0)
            return "left" if y > cy else "right"
    return None


def _plan_offset(plan: np.ndarray, cx: float, cy: float) -> float:
    i = int(np.argmin(np.abs(plan[:, 0] - cx)))
    return float(plan[i, 1] - cy)


def commit_step(log: RunLog, obstacle: tuple[float, float, float]) -> int | None:
    """First step whose planned path passes the obstacle more than half a radius off-centre.

    The planned lateral offset is read at the planned state whose x is
    closest to the obstacle centre. Needs a log recorded with plans.
    """
    cx, cy, r = obstacle
    for rec in log.records:
        if rec.plan is None:
            raise ValueError("log was recorded without plans")
        if abs(_plan_offset(np.asarray(rec.plan), cx, cy)) > 0.5 * r:
            return rec.step
    return None


@dataclass(frozen=True)
class SymmetryStats:
    left_fraction: float
    n_left: int
    n_passed: int
    commit_steps: list[int | None]
    sides: list[str | None]
    outcomes: list[Outcome]
    seeds: list[int]

    @property
    def median_commit_step(self) -> float:
        steps = [s for s in self.commit_steps if s is not None]
        return float(np.median(steps)) if steps else float("nan")


def symmetry_scenario_stats(
    scenario: Scenario,
    cfg: SolverConfig,
    n_seeds: int,
    planner: str = "mppi",
    workers: int = 1,
) -> SymmetryStats:
    """Run ``n_seeds`` independent closed loops and tally which side each passes.

    Run ``i`` uses master seed ``derive_seed(cfg.seed.master_seed, i)``.
    ``left_fraction`` is over the runs that actually crossed the obstacle.
    """
    obstacle = scenario.obstacles[0]
    seeds = [derive_seed(cfg.seed.master_seed, i) for i in range(n_seeds)]
    run_cfgs = [replace(cfg, seed=SeedSpec(s, 0)) for s in seeds]

    def one(c: SolverConfig):
        log = run_scenario(scenario, planner, c, keep_plans=True)
        return pass_side(log, obstacle), commit_step(log, obstacle), log.outcome

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, run_cfgs))
    else:
        results = [one(c) for c in run_cfgs]
    sides = [r[0] for r in results]
    n_passed = sum(s is not None for s in sides)
    n_left = sides.count("left")
    return SymmetryStats(
        left_fraction=n_left / n_passed if n_passed else float("nan"),
        n_left=n_left,
        n_passed=n_passed,
        commit_steps=[r[1] for r in results],
        sides=sides,
        outcomes=[r[2] for r in results],
        seeds=seeds,
    )
