"""Command-line front end: analyze, simulate, codesign, and sweep runs.

Exit codes: 0 success, 2 config error, 3 infeasible problem, 4 unstable step
size, 5 solver non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import analysis, codesign, formation, io
from .errors import (
    ConfigError,
    ConvergenceError,
    DisconnectedGraphError,
    PrivformError,
    UnstableGammaError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_UNSTABLE = 4
EXIT_NO_CONVERGENCE = 5

MODES = ("analyze", "simulate", "codesign", "sweep")


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation: what to run, on which config, where to write."""

    mode: str
    config_path: Path
    out_dir: Path
    seed: int = 0
    trials: int | None = None
    horizon: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")


def _analyze(run: RunConfig, cfg: dict[str, Any]) -> int:
    scenario, _ = io.scenario_from_config(cfg, run.config_path.parent)
    report = analysis.steady_state(scenario)
    io.write_json(run.out_dir / "covariance_report.json", report.to_dict())
    print(f"analyze: e_ss_exact={report.e_ss_exact!r} bound={report.e_ss_bound!r}")
    return EXIT_OK


def _simulate(run: RunConfig, cfg: dict[str, Any]) -> int:
    scenario, sim_tbl = io.scenario_from_config(cfg, run.config_path.parent)
    horizon = run.horizon or int(sim_tbl.get("horizon", 10_000))
    trials = run.trials or int(sim_tbl.get("trials", 1))
    burn_in = sim_tbl.get("burn_in")
    spread = float(sim_tbl.get("initial_spread", 0.5))
    summary = formation.simulate_trials(
        scenario,
        horizon,
        run.seed,
        trials,
        burn_in=int(burn_in) if burn_in is not None else None,
        initial_spread=spread,
    )
    report = analysis.steady_state(scenario)
    comparison = {
        "empirical_mse_tail": summary.mean,
        "per_trial": summary.per_trial.tolist(),
        "e_ss_exact": report.e_ss_exact,
        "e_ss_bound": report.e_ss_bound,
        "relative_error": (summary.mean - report.e_ss_exact)
        / max(report.e_ss_exact, 1e-300),
        "horizon": horizon,
        "burn_in": summary.burn_in,
        "trials": trials,
        "seed": run.seed,
    }
    io.write_trajectory_csv(
        run.out_dir / "trajectory.csv", summary.first_trial, scenario.formation
    )
    io.write_json(run.out_dir / "comparison.json", comparison)
    print(
        f"simulate: empirical={summary.mean!r} exact={report.e_ss_exact!r} "
        f"relative_error={comparison['relative_error']:.4%}"
    )
    return EXIT_OK


def _write_solution(
    run: RunConfig,
    problem: codesign.CodesignProblem,
    solution: codesign.CodesignSolution,
    stem: str,
) -> None:
    payload = solution.to_dict()
    if solution.feasible:
        payload["validation"] = codesign.validate_solution(problem, solution).to_dict()
    io.write_json(run.out_dir / f"{stem}.json", payload)
    if solution.graph.weights:
        io.export_dot(solution.graph, solution.epsilons, run.out_dir / f"{stem}.dot")


def _codesign(run: RunConfig, cfg: dict[str, Any]) -> int:
    problem, options, _ = io.problem_from_config(cfg, run.config_path.parent)
    solution = codesign.solve(problem, options, seed=run.seed)
    _write_solution(run, problem, solution, "solution")
    print(
        f"codesign: status={solution.status} objective={solution.objective_value!r} "
        f"stationarity={solution.stationarity:.3e}"
    )
    if solution.status == "infeasible":
        print(f"infeasible: {solution.message}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if not solution.converged:
        print("solver did not converge within its iteration budget", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _apply_axis(
    problem: codesign.CodesignProblem, axis: str, value: float
) -> codesign.CodesignProblem:
    if axis == "e_R":
        return dataclasses.replace(problem, error_budget=value)
    if axis == "lambda2_min":
        return dataclasses.replace(problem, lambda2_min=value)
    if axis == "vartheta":
        return dataclasses.replace(problem, privacy_weight=value)
    if axis == "eps_max_uniform":
        return dataclasses.replace(
            problem, epsilon_max=np.full(problem.n, float(value))
        )
    raise ConfigError(f"unknown sweep axis {axis!r}")


def _sweep(run: RunConfig, cfg: dict[str, Any]) -> int:
    problem, options, sweep = io.problem_from_config(cfg, run.config_path.parent)
    if sweep is None:
        raise ConfigError("sweep mode needs a [sweep] section")
    axis, values = sweep["parameter"], sweep["values"]
    rows: list[dict[str, Any]] = []
    worst = EXIT_OK
    previous: codesign.CodesignSolution | None = None
    for value in values:
        point = _apply_axis(problem, axis, value)
        point_options = options
        if previous is not None and previous.feasible:
            warm_w = tuple(
                previous.graph.weights.get(e, 0.0) for e in point.edges
            )
            warm_eps = tuple(float(e) for e in previous.epsilons)
            point_options = dataclasses.replace(
                options, extra_starts=((warm_w, warm_eps),)
            )
        solution = codesign.solve(point, point_options, seed=run.seed)
        _write_solution(run, point, solution, f"solution_{axis}_{value:g}")
        print(
            f"sweep {axis}={value:g}: status={solution.status} "
            f"objective={solution.objective_value!r}"
        )
        if solution.status == "infeasible":
            print(f"infeasible at {axis}={value:g}: {solution.message}", file=sys.stderr)
            worst = max(worst, EXIT_INFEASIBLE)
            continue
        if not solution.converged:
            worst = max(worst, EXIT_NO_CONVERGENCE)
        previous = solution
        w = np.array([solution.graph.weights.get(e, 0.0) for e in point.edges])
        cv = codesign.constraint_values(point, w, solution.epsilons)
        _, deg = codesign._Workspace(point, options).adjacency(w)
        for agent in range(point.n):
            rows.append(
                {
                    "parameter": axis,
                    "value": value,
                    "agent": agent + 1,
                    "epsilon": solution.epsilons[agent],
                    "degree": deg[agent],
                    "lambda2": cv.lambda2,
                    "bound": cv.bound,
                    "objective": solution.objective_value,
                }
            )
    io.write_sweep_csv(run.out_dir / "sweep_summary.csv", rows)
    return worst


def run(config: RunConfig) -> int:
    """Execute one run; returns the process exit code."""
    cfg = io.load_toml(config.config_path)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    if config.mode == "analyze":
        return _analyze(config, cfg)
    if config.mode == "simulate":
        return _simulate(config, cfg)
    if config.mode == "codesign":
        return _codesign(config, cfg)
    return _sweep(config, cfg)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privform",
        description="Analyze, simulate, and co-design private formation-control networks.",
        epilog="Exit codes: 0 ok, 2 config error, 3 infeasible, 4 unstable step size, "
        "5 solver non-convergence.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, text in (
        ("analyze", "exact steady-state error report for a scenario"),
        ("simulate", "run the private protocol and compare with the exact error"),
        ("codesign", "solve the topology/privacy design program"),
        ("sweep", "repeat codesign along one parameter axis"),
    ):
        p = sub.add_parser(mode, help=text)
        p.add_argument("--config", required=True, type=Path, help="TOML config file")
        p.add_argument("--out", required=True, type=Path, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="top-level RNG seed")
        p.add_argument("--trials", type=int, default=None, help="simulation trials")
        p.add_argument("--horizon", type=int, default=None, help="simulation steps")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    run_config = RunConfig(
        mode=args.mode,
        config_path=args.config,
        out_dir=args.out,
        seed=args.seed,
        trials=args.trials,
        horizon=args.horizon,
    )
    try:
        return run(run_config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnstableGammaError as exc:
        print(f"unstable step size: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (DisconnectedGraphError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except PrivformError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
