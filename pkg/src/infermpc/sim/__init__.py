"""Receding-horizon simulation on 2D point-mass obstacle scenarios."""

from .envs import Environment, Scenario, benchmark_scenario, corridor_scenario, point_mass_step
from .loop import Outcome, RunLog, StepRecord, closed_loop_cost, mpc_run, replay, run_scenario
from .symmetry import SymmetryStats, commit_step, pass_side, symmetry_scenario_stats

__all__ = [
    "Environment",
    "Outcome",
    "RunLog",
    "Scenario",
    "StepRecord",
    "SymmetryStats",
    "benchmark_scenario",
    "closed_loop_cost",
    "commit_step",
    "corridor_scenario",
    "mpc_run",
    "pass_side",
    "point_mass_step",
    "replay",
    "run_scenario",
    "symmetry_scenario_stats",
]
