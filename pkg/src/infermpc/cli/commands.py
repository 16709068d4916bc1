"""Experiment recipes: each ``cmd_*`` takes a config and writes CSV files.

All randomness flows from ``experiment.seed`` through counter-based streams,
and ``experiment.threads`` only decides how independent cells are scheduled,
so outputs are byte-identical for any thread count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from ..distributions import SeedSpec, derive_seed
from ..errors import ConfigError, InferMPCError
from ..posterior import (
    Grid1D,
    count_modes,
    expected_cost,
    get_cost,
    grid_posterior,
    posterior_moments,
    static_problem,
)
from ..sim import Scenario, benchmark_scenario, corridor_scenario, run_scenario, symmetry_scenario_stats
from ..sim.loop import Outcome, fmt
from ..solvers import PLANNERS, SolverConfig
from .config import ExperimentConfig

DENSITY_COLUMNS = ("u", "prior_pdf", "boltzmann_factor", "posterior_pdf")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def _tag(x: float) -> str:
    return format(float(x), "g").replace("-", "m")


def _out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.experiment.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    return out


def _map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _grid(cfg: ExperimentConfig) -> Grid1D:
    p = cfg.posterior
    return Grid1D(p.grid_lo, p.grid_hi, p.grid_n)


def _density(cfg: ExperimentConfig, mean: float, std: float, lam: float):
    p = cfg.posterior
    return grid_posterior(get_cost(p.cost), mean, std, lam, _grid(cfg), truncate=p.truncate)


def _summary_row(cfg: ExperimentConfig, d) -> list:
    m = posterior_moments(d)
    return [m.mean, m.variance, float(np.sqrt(m.variance)), m.entropy, expected_cost(d),
            count_modes(d, cfg.posterior.mode_threshold), d.log_normalizer]


SUMMARY_COLUMNS = ("mean", "variance", "std", "entropy", "expected_cost", "n_modes", "log_normalizer")


def cmd_posterior(cfg: ExperimentConfig) -> list[Path]:
    """Density CSV per (prior, lambda) plus a moments summary."""
    out = _out(cfg)
    p = cfg.posterior
    written, summary = [], []
    for mean in p.prior_means:
        for std in p.prior_stds:
            for lam in p.lambdas:
                d = _density(cfg, mean, std, lam)
                name = f"posterior_mu{_tag(mean)}_sigma{_tag(std)}_lambda{_tag(lam)}.csv"
                written.append(write_csv(out / name, DENSITY_COLUMNS, zip(d.u, d.prior_pdf, d.boltzmann, d.values)))
                summary.append([mean, std, lam, *_summary_row(cfg, d)])
    written.append(write_csv(out / "summary.csv", ("prior_mean", "prior_std", "lambda", *SUMMARY_COLUMNS), summary))
    return written


def solver_config(cfg: ExperimentConfig, seed: int, std: Sequence[float] | None = None, K: int | None = None, threads: int = 1) -> SolverConfig:
    s = cfg.solver
    return SolverConfig(
        K=s.K if K is None else K,
        lam=s.lam,
        std=tuple(s.std if std is None else std),
        warm_start_fill=s.warm_start_fill,
        seed=SeedSpec(seed, 0),
        threads=threads,
    )


def scenario_from(cfg: ExperimentConfig) -> Scenario:
    sc = cfg.scenario
    common = dict(
        horizon=cfg.solver.horizon,
        goal_radius=sc.goal_radius,
        process_noise_std=sc.process_noise_std,
        plant_gain=sc.plant_gain,
    )
    if sc.max_steps > 0:
        common["max_steps"] = sc.max_steps
    if sc.kind == "benchmark":
        return benchmark_scenario(**common)
    if sc.kind == "corridor":
        return corridor_scenario(offset_radii=sc.offset_radii, **common)
    raise ConfigError(f"scenario.kind must be 'benchmark' or 'corridor', got {sc.kind!r}")


def _planner(cfg: ExperimentConfig) -> str:
    if cfg.solver.planner not in PLANNERS:
        raise ConfigError(f"solver.planner must be one of {sorted(PLANNERS)}, got {cfg.solver.planner!r}")
    return cfg.solver.planner


def _static(cfg: ExperimentConfig):
    p = cfg.posterior
    return static_problem(get_cost(p.cost), p.grid_lo, p.grid_hi), p.prior_means[0], p.prior_stds[0]


def cmd_solve(cfg: ExperimentConfig) -> list[Path]:
    """One planner step on the static 1D problem or from a scenario's start."""
    out = _out(cfg)
    planner = _planner(cfg)
    if cfg.solve.problem == "static1d":
        problem, mean, std = _static(cfg)
        x0, prior = np.zeros(1), np.full((1, 1), mean)
        scfg = solver_config(cfg, cfg.experiment.seed, std=(std,), threads=cfg.experiment.threads)
    elif cfg.solve.problem == "scenario":
        scenario = scenario_from(cfg)
        problem = scenario.problem()
        x0, prior = scenario.environment().initial_state, np.zeros(problem.input_shape)
        scfg = solver_config(cfg, cfg.experiment.seed, threads=cfg.experiment.threads)
    else:
        raise ConfigError(f"solve.problem must be 'static1d' or 'scenario', got {cfg.solve.problem!r}")
    rep = PLANNERS[planner](problem, x0, prior, scfg)
    cols = ("t", *(f"u{i}" for i in range(problem.input_dim)))
    written = [write_csv(out / "solution.csv", cols, ([t, *row] for t, row in enumerate(rep.solution)))]
    report = [
        ("planner", planner), ("K", scfg.K), ("lambda", scfg.lam), ("solution_cost", rep.solution_cost),
        ("min_cost", rep.min_cost), ("mean_cost", rep.mean_cost), ("ess", rep.ess),
    ]
    written.append(write_csv(out / "report.csv", ("key", "value"), report))
    return written


def cmd_simulate(cfg: ExperimentConfig) -> list[Path]:
    out = _out(cfg)
    log = run_scenario(scenario_from(cfg), _planner(cfg), solver_config(cfg, cfg.experiment.seed, threads=cfg.experiment.threads))
    (out / "runlog.jsonl").write_text(log.to_jsonl(), encoding="utf-8")
    (out / "trace.csv").write_text(log.trace_csv(), encoding="utf-8")
    summary = write_csv(out / "summary.csv", ("outcome", "steps", "total_cost"),
                        [(log.outcome.value, len(log.records), log.total_cost)])
    return [out / "runlog.jsonl", out / "trace.csv", summary]


def cmd_compare(cfg: ExperimentConfig) -> list[Path]:
    """MPPI vs random shooting over a seed grid x K grid on one scenario.

    Run ``i`` of every cell uses the same derived seed, so the comparison is
    paired. A failing run is recorded in its cell and never aborts the sweep.
    """
    out = _out(cfg)
    scenario = scenario_from(cfg)
    seeds = [derive_seed(cfg.experiment.seed, i) for i in range(cfg.sweep.n_seeds)]
    cells = [(planner, k, i) for planner in ("mppi", "random_shooting") for k in cfg.sweep.ks for i in range(len(seeds))]

    def run(cell):
        planner, k, i = cell
        try:
            log = run_scenario(scenario, planner, solver_config(cfg, seeds[i], K=k))
        except InferMPCError as exc:
            log = getattr(exc, "partial_log", None)
            return cell, None, str(exc) or type(exc).__name__, log
        return cell, log, None, log

    results = _map(run, cells, cfg.experiment.threads)
    runs_dir = out / "runs"
    runs_dir.mkdir(exist_ok=True)
    rows, written = [], []
    for planner in ("mppi", "random_shooting"):
        for k in cfg.sweep.ks:
            cell_res = [r for r in results if r[0][0] == planner and r[0][1] == k]
            logs = [r[1] for r in cell_res if r[1] is not None]
            outcomes = [lg.outcome for lg in logs]
            costs = [lg.total_cost for lg in logs]
            n_err = sum(r[2] is not None for r in cell_res)
            n = len(cell_res)
            rows.append([
                planner, k, n,
                outcomes.count(Outcome.REACHED_GOAL) / n,
                outcomes.count(Outcome.COLLIDED), outcomes.count(Outcome.TIMEOUT), n_err,
                float(np.median(costs)) if costs else float("nan"),
            ])
            for (_, _, i), log, err, partial in cell_res:
                stem = runs_dir / f"{planner}_K{k}_run{i:03d}"
                if partial is not None:
                    stem.with_suffix(".jsonl").write_text(partial.to_jsonl(), encoding="utf-8")
                    stem.with_suffix(".csv").write_text(partial.trace_csv(), encoding="utf-8")
    header = ("planner", "K", "n_runs", "success_rate", "n_collided", "n_timeout", "n_errors", "median_cost")
    written.append(write_csv(out / "compare_summary.csv", header, rows))
    return written


def _static_mppi(cfg: ExperimentConfig, lam: float, k: int, seed: int):
    problem, mean, std = _static(cfg)
    scfg = SolverConfig(K=k, lam=lam, std=(std,), seed=SeedSpec(seed, 0))
    return PLANNERS["mppi"](problem, np.zeros(1), np.full((1, 1), mean), scfg)


def cmd_sweep_lambda(cfg: ExperimentConfig) -> list[Path]:
    """Posterior shape and a static MPPI estimate per temperature."""
    out = _out(cfg)
    mean, std = cfg.posterior.prior_means[0], cfg.posterior.prior_stds[0]

    def row(lam):
        d = _density(cfg, mean, std, lam)
        rep = _static_mppi(cfg, lam, cfg.solver.K, cfg.experiment.seed)
        sol = float(rep.solution[0, 0])
        m = posterior_moments(d)
        return [lam, *_summary_row(cfg, d), sol, abs(sol - m.mean), rep.ess]

    rows = _map(row, list(cfg.sweep.lambdas), cfg.experiment.threads)
    header = ("lambda", *SUMMARY_COLUMNS, "mppi_solution", "mppi_abs_error", "mppi_ess")
    return [write_csv(out / "sweep_lambda.csv", header, rows)]


def cmd_sweep_samples(cfg: ExperimentConfig) -> list[Path]:
    """MPPI error against the grid oracle as the sample count grows."""
    out = _out(cfg)
    mean, std = cfg.posterior.prior_means[0], cfg.posterior.prior_stds[0]
    lam = cfg.solver.lam
    target = posterior_moments(_density(cfg, mean, std, lam)).mean
    seeds = [derive_seed(cfg.experiment.seed, i) for i in range(cfg.sweep.n_seeds)]

    def row(k):
        errs, ess = [], []
        for s in seeds:
            rep = _static_mppi(cfg, lam, k, s)
            errs.append(abs(float(rep.solution[0, 0]) - target))
            ess.append(rep.ess)
        return [k, lam, target, float(np.mean(errs)), float(np.median(errs)), float(np.median(ess)), len(seeds)]

    rows = _map(row, list(cfg.sweep.ks), cfg.experiment.threads)
    header = ("K", "lambda", "oracle_mean", "mean_abs_error", "median_abs_error", "median_ess", "n_seeds")
    return [write_csv(out / "sweep_samples.csv", header, rows)]


def cmd_sweep_prior(cfg: ExperimentConfig) -> list[Path]:
    """Posterior quality for every (prior mean, prior std) pair at one temperature."""
    out = _out(cfg)
    lam = cfg.posterior.lambdas[0]
    pairs = [(m, s) for m in cfg.posterior.prior_means for s in cfg.posterior.prior_stds]
    rows = [[m, s, lam, *_summary_row(cfg, _density(cfg, m, s, lam))] for m, s in pairs]
    order = np.argsort([r[7] for r in rows], kind="stable")
    rank = np.empty(len(rows), dtype=int)
    rank[order] = np.arange(1, len(rows) + 1)
    rows = [r + [int(rk)] for r, rk in zip(rows, rank)]
    header = ("prior_mean", "prior_std", "lambda", *SUMMARY_COLUMNS, "rank_by_expected_cost")
    return [write_csv(out / "sweep_prior.csv", header, rows)]


def cmd_symmetry(cfg: ExperimentConfig) -> list[Path]:
    out = _out(cfg)
    scenario = scenario_from(cfg)
    planner = _planner(cfg)
    run_rows, summary = [], []
    for std in cfg.symmetry.stds:
        scfg = solver_config(cfg, cfg.experiment.seed, std=(std,))
        st = symmetry_scenario_stats(scenario, scfg, cfg.symmetry.n_seeds, planner=planner, workers=cfg.experiment.threads)
        for i, (seed, side, commit, outcome) in enumerate(zip(st.seeds, st.sides, st.commit_steps, st.outcomes)):
            run_rows.append([std, i, seed, side or "none", commit, outcome.value])
        summary.append([std, cfg.symmetry.n_seeds, st.n_passed, st.n_left, st.left_fraction, st.median_commit_step])
    return [
        write_csv(out / "symmetry_runs.csv", ("std", "run", "seed", "side", "commit_step", "outcome"), run_rows),
        write_csv(out / "symmetry_summary.csv", ("std", "n_seeds", "n_passed", "n_left", "left_fraction", "median_commit_step"), summary),
    ]


COMMANDS: dict[str, Callable[[ExperimentConfig], list[Path]]] = {
    "posterior": cmd_posterior,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "sweep_lambda": cmd_sweep_lambda,
    "sweep_samples": cmd_sweep_samples,
    "sweep_prior": cmd_sweep_prior,
    "symmetry": cmd_symmetry,
}


def run_kind(cfg: ExperimentConfig) -> list[Path]:
    return COMMANDS[cfg.experiment.kind](cfg)
