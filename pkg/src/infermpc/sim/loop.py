"""Closed-loop receding-horizon runs and their replayable logs."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from ..core import Problem
from ..distributions import SeedSpec, shift_warm_start, standard_normal
from ..errors import ConfigError, SolverFailure
from ..solvers import PLANNERS, SolverConfig
from .envs import Environment, Scenario

PROCESS_NOISE_STREAM = 1 << 63
LOG_FORMAT = "infermpc.runlog/1"
TRACE_COLUMNS = ("step", "px", "py", "vx", "vy", "ux", "uy", "cost", "ess")


class Outcome(str, Enum):
    REACHED_GOAL = "reached_goal"
    COLLIDED = "collided"
    TIMEOUT = "timeout"


@dataclass
class StepRecord:
    step: int
    state: list[float]
    input: list[float]
    stage_cost: float
    solution_cost: float
    min_cost: float
    mean_cost: float
    ess: float
    collision: bool
    distance_to_goal: float
    plan: list[list[float]] | None = None


@dataclass
class RunLog:
    planner: str
    solver: dict
    scenario: dict | None
    records: list[StepRecord] = field(default_factory=list)
    final_state: list[float] = field(default_factory=list)
    outcome: Outcome = Outcome.TIMEOUT
    total_cost: float = 0.0
    error: str | None = None

    def to_jsonl(self) -> str:
        header = {
            "format": LOG_FORMAT,
            "planner": self.planner,
            "solver": self.solver,
            "scenario": self.scenario,
            "outcome": self.outcome.value,
            "total_cost": self.total_cost,
            "final_state": self.final_state,
            "n_records": len(self.records),
            "error": self.error,
        }
        lines = [json.dumps(header, sort_keys=True)]
        lines += [json.dumps(asdict(r), sort_keys=True) for r in self.records]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "RunLog":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or rows[0].get("format") != LOG_FORMAT:
            raise ConfigError(f"not a {LOG_FORMAT} document")
        head = rows[0]
        return cls(
            planner=head["planner"],
            solver=head["solver"],
            scenario=head["scenario"],
            records=[StepRecord(**r) for r in rows[1:]],
            final_state=head["final_state"],
            outcome=Outcome(head["outcome"]),
            total_cost=head["total_cost"],
            error=head["error"],
        )

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.records:
            w.writerow([r.step, *(fmt(v) for v in r.state), *(fmt(v) for v in r.input), fmt(r.stage_cost), fmt(r.ess)])
        return buf.getvalue()


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def solver_snapshot(cfg: SolverConfig) -> dict:
    # threads is excluded: it never changes results
    return {
        "K": cfg.K,
        "lam": cfg.lam,
        "std": list(cfg.std),
        "warm_start_fill": cfg.warm_start_fill.value,
        "master_seed": cfg.seed.master_seed,
    }


def solver_from_snapshot(snap: dict, threads: int = 1) -> SolverConfig:
    return SolverConfig(
        K=snap["K"],
        lam=snap["lam"],
        std=tuple(snap["std"]),
        warm_start_fill=snap["warm_start_fill"],
        seed=SeedSpec(snap["master_seed"], 0),
        threads=threads,
    )


def mpc_run(env: Environment, planner: str, cfg: SolverConfig, problem: Problem, keep_plans: bool = False) -> RunLog:
    """Run receding-horizon control until goal, collision or ``env.max_steps``.

    The planner at step ``t`` uses seed stream ``t``; process noise uses a
    disjoint stream family. The first prior mean is the zero sequence.
    """
    try:
        solve = PLANNERS[planner]
    except KeyError:
        raise ConfigError(f"unknown planner {planner!r}; choose from {sorted(PLANNERS)}") from None
    log = RunLog(
        planner=planner,
        solver=solver_snapshot(cfg),
        scenario=env.scenario.to_dict() if env.scenario is not None else None,
    )
    state = np.array(env.initial_state, dtype=float)
    prior = np.zeros(problem.input_shape)
    noisy = bool(np.any(env.process_noise_std > 0))
    total = 0.0
    outcome = None
    if env.distance_to_goal(state) <= env.goal_radius:
        outcome = Outcome.REACHED_GOAL
    elif env.collided(state):
        outcome = Outcome.COLLIDED

    step = 0
    while outcome is None and step < env.max_steps:
        try:
            report = solve(problem, state, prior, cfg.with_stream(step))
        except SolverFailure as exc:
            log.final_state = state.tolist()
            log.error = str(exc)
            exc.partial_log = log
            raise
        u0 = report.solution[0]
        stage = float(problem.stage_cost(state, u0, 0))
        total += stage
        nxt = np.asarray(env.plant(state, u0), dtype=float)
        if noisy:
            z = standard_normal(SeedSpec(cfg.seed.master_seed, PROCESS_NOISE_STREAM | step), [0], 4)[0]
            nxt = nxt + env.process_noise_std * z
        hit = env.collided(nxt)
        dist = env.distance_to_goal(nxt)
        log.records.append(
            StepRecord(
                step=step,
                state=state.tolist(),
                input=u0.tolist(),
                stage_cost=stage,
                solution_cost=report.solution_cost,
                min_cost=report.min_cost,
                mean_cost=report.mean_cost,
                ess=report.ess,
                collision=hit,
                distance_to_goal=dist,
                plan=report.trajectory.states.tolist() if keep_plans else None,
            )
        )
        state = nxt
        prior = shift_warm_start(report.solution, cfg.warm_start_fill)
        step += 1
        if hit:
            outcome = Outcome.COLLIDED
        elif dist <= env.goal_radius:
            outcome = Outcome.REACHED_GOAL

    log.outcome = outcome or Outcome.TIMEOUT
    log.final_state = state.tolist()
    log.total_cost = total + float(problem.terminal_cost(state))
    return log


def run_scenario(scenario: Scenario, planner: str, cfg: SolverConfig, keep_plans: bool = False) -> RunLog:
    return mpc_run(scenario.environment(), planner, cfg, scenario.problem(), keep_plans=keep_plans)


def replay(log: RunLog, threads: int = 1) -> RunLog:
    """Re-run a logged experiment from its configuration snapshot."""
    if log.scenario is None:
        raise ConfigError("log has no scenario snapshot to replay from")
    scenario = Scenario.from_dict(log.scenario)
    keep = bool(log.records) and log.records[0].plan is not None
    return run_scenario(scenario, log.planner, solver_from_snapshot(log.solver, threads), keep_plans=keep)


def closed_loop_cost(log: RunLog, problem: Problem) -> float:
    """Recompute a log's total cost from its (state, applied input) pairs."""
    total = 0.0
    for r in log.records:
        total += float(problem.stage_cost(np.array(r.state), np.array(r.input), 0))
    return total + float(problem.terminal_cost(np.array(log.final_state)))
