#!/usr/bin/env python3
#
#  sincheb
#  sincheb
#
#  Command-line front end: run, sweep, noise and show-plan over a JSON
#  problem file, writing CSV or JSON-lines.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, replace
from sincheb.cli.problem import parse_problem
from sincheb.common.core import InvalidArgumentError, SinchebError, _setup_logging, cRed, cReset, e_convergence, e_success, e_validation
from sincheb.pipeline.estimator import EstimateOptions, EstimateReport, EvolutionProblem, ParameterOverrides, choose_parameters, full_estimate, predicted_query_count
from sincheb.pipeline.noise import noise_study
from sincheb.sinc.query import uncertainty_bound_linf, variance_bound
from typing import Any, Dict, List, Optional, Sequence, TextIO

version = "0.1.0"

run_columns = ["value_re", "value_im", "exact_re", "exact_im", "abs_error", "eps", "eps_cheb", "eps_sinc", "p", "g", "n", "q", "query_count", "max_depth", "converged", "fallback_g", "sinc_error_bound", "cheb_error_bound"]
sweep_columns = ["axis", "value", "abs_error", "sinc_error_bound", "cheb_error_bound", "p", "g", "n", "q", "query_count", "max_depth", "converged", "wall_time"]
noise_columns = ["sigma_noise", "trials", "q", "n", "empirical_variance", "predicted_variance", "linf_node_bound", "variance_node_bound", "empirical_std", "std_bound", "std_bound_w_min", "pass"]
plan_columns = ["eps", "p", "g", "n", "q", "alpha_max", "T_max", "fallback_g", "predicted_cheb_error", "query_count", "max_depth"]


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every subcommand."""

    eps: float
    overrides: ParameterOverrides
    adaptive: bool
    seed: int
    out: Optional[str]
    fmt: str
    auto_normalize: bool

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        overrides = ParameterOverrides(p=args.override_p, g=args.override_g, n=args.override_n, q=args.override_q)
        return cls(eps=args.eps, overrides=overrides, adaptive=args.adaptive, seed=args.seed, out=args.out, fmt=args.format, auto_normalize=args.auto_normalize)

    @property
    def options(self) -> EstimateOptions:
        return EstimateOptions(adaptive=self.adaptive, overrides=self.overrides)


def _format(value: Any) -> str:
    """Formats a value for CSV: floats round-trip exactly, None is empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17e" % value
    return str(value)


def _write_rows(rows: Sequence[Dict[str, Any]], columns: List[str], fmt: str, stream: TextIO) -> None:
    """Writes rows as CSV with a header, or as JSON lines."""
    if fmt == "jsonl":
        for row in rows:
            stream.write(json.dumps({c: row[c] for c in columns}) + "\n")
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format(row[c]) for c in columns])


def _emit(rows: Sequence[Dict[str, Any]], columns: List[str], config: RunConfig) -> None:
    """Writes rows to --out, or to stdout without it."""
    if config.out:
        with open(config.out, "w", newline="") as f:
            _write_rows(rows, columns, config.fmt, f)
    else:
        _write_rows(rows, columns, config.fmt, sys.stdout)


def _report_row(report: EstimateReport) -> Dict[str, Any]:
    """One output row of a full_estimate report."""
    params = report.parameters
    exact = report.exact_value
    return {
        "value_re": report.value.real,
        "value_im": report.value.imag,
        "exact_re": None if exact is None else exact.real,
        "exact_im": None if exact is None else exact.imag,
        "abs_error": report.error,
        "eps": params.eps,
        "eps_cheb": params.eps_cheb,
        "eps_sinc": params.eps_sinc,
        "p": params.p,
        "g": params.g,
        "n": params.n,
        "q": params.q,
        "query_count": report.query_count,
        "max_depth": report.max_depth,
        "converged": report.converged,
        "fallback_g": report.fallback_g,
        "sinc_error_bound": report.sinc_error_bound,
        "cheb_error_bound": report.cheb_error_bound,
    }


def cmd_run(problem: EvolutionProblem, config: RunConfig) -> int:
    """Runs full_estimate once and writes one row."""
    report = full_estimate(problem, config.eps, config.options)
    _emit([_report_row(report)], run_columns, config)
    return e_convergence if report.converged is False else e_success


def _scale_times(problem: EvolutionProblem, t_max: float) -> EvolutionProblem:
    """Rescales every T_j so that the largest equals t_max."""
    if max(problem.times) == 0:
        raise InvalidArgumentError("cannot sweep T when every T_j is 0")
    factor = t_max / max(problem.times)
    stages = tuple(replace(s, t=s.t * factor) for s in problem.stages)
    return replace(problem, stages=stages)


def cmd_sweep(problem: EvolutionProblem, config: RunConfig, axis: str, values: Sequence[float]) -> int:
    """One full_estimate per axis value; one row each."""
    if axis in ("q", "n") and any(v != int(v) for v in values):
        raise InvalidArgumentError(f"axis {axis} needs integer values, got {','.join(f'{v:g}' for v in values)}")
    rows = []
    failed = False
    for value in values:
        run_problem, run_config = problem, config
        if axis in ("q", "n"):
            run_config = replace(config, overrides=replace(config.overrides, **{axis: int(value)}))
        elif axis == "eps":
            run_config = replace(config, eps=float(value))
        elif axis == "T":
            run_problem = _scale_times(problem, float(value))
        start = time.perf_counter()
        report = full_estimate(run_problem, run_config.eps, run_config.options)
        wall = time.perf_counter() - start
        failed = failed or report.converged is False
        params = report.parameters
        rows.append({
            "axis": axis,
            "value": float(value),
            "abs_error": report.error,
            "sinc_error_bound": report.sinc_error_bound,
            "cheb_error_bound": report.cheb_error_bound,
            "p": params.p,
            "g": params.g,
            "n": params.n,
            "q": params.q,
            "query_count": report.query_count,
            "max_depth": report.max_depth,
            "converged": report.converged,
            "wall_time": wall,
        })
    _emit(rows, sweep_columns, config)
    return e_convergence if failed else e_success


def cmd_noise(problem: EvolutionProblem, config: RunConfig, sigma_noise: float, trials: int) -> int:
    """Monte-Carlo noise study at the chosen parameters; one row."""
    params = choose_parameters(problem, config.eps, config.overrides)
    stats = noise_study(problem, params, sigma_noise, trials, config.seed)
    row = {
        "sigma_noise": stats.sigma_noise,
        "trials": stats.trials,
        "q": params.q,
        "n": params.n,
        "empirical_variance": stats.empirical_variance,
        "predicted_variance": stats.predicted_variance,
        "linf_node_bound": uncertainty_bound_linf(params.q, sigma_noise),
        "variance_node_bound": variance_bound(sigma_noise ** 2),
        "empirical_std": stats.empirical_std,
        "std_bound": stats.std_bound,
        "std_bound_w_min": stats.std_bound_w_min,
        "pass": stats.passed,
    }
    _emit([row], noise_columns, config)
    return e_success


def cmd_show_plan(problem: EvolutionProblem, config: RunConfig) -> int:
    """Prints the parameter choice and its predicted cost without sampling."""
    params = choose_parameters(problem, config.eps, config.overrides)
    count, depth = predicted_query_count(problem, params)
    row = {
        "eps": params.eps,
        "p": params.p,
        "g": params.g,
        "n": params.n,
        "q": params.q,
        "alpha_max": params.alpha_max,
        "T_max": params.T_max,
        "fallback_g": params.fallback_g,
        "predicted_cheb_error": params.predicted_cheb_error,
        "query_count": count,
        "max_depth": depth,
    }
    _emit([row], plan_columns, config)
    return e_success


def _parse_values(text: str) -> List[float]:
    """Parses the comma-separated --values list."""
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    """Builds the argparse parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="JSON problem file")
    common.add_argument("--eps", type=float, default=1e-4, help="Total algorithmic error (default: 1e-4)")
    common.add_argument("--seed", type=int, default=0, help="Random seed for noise studies")
    common.add_argument("--adaptive", action="store_true", help="Double n until successive estimates agree within eps/4")
    for name in ("p", "g", "n", "q"):
        common.add_argument(f"--override-{name}", f"--{name}-override", dest=f"override_{name}", type=int, default=None, help=f"Fix {name} instead of choosing it")
    common.add_argument("--out", default=None, help="Output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "jsonl"], default="csv", help="Output format")
    common.add_argument("--auto-normalize", action="store_true", help="Rescale H and T when term norms sum above 1")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")

    parser = argparse.ArgumentParser(prog="sincheb", description="Sinc fractional queries with Chebyshev extrapolation of Trotterised evolutions.")
    sub = parser.add_subparsers(dest="action", required=True)
    sub.add_parser("run", parents=[common], help="Estimate the amplitude once")
    sweep = sub.add_parser("sweep", parents=[common], help="Estimate over a range of one parameter")
    sweep.add_argument("--axis", choices=["q", "n", "T", "eps"], required=True)
    sweep.add_argument("--values", type=_parse_values, required=True, help="Comma-separated axis values")
    noise = sub.add_parser("noise", parents=[common], help="Monte-Carlo study of sample noise")
    noise.add_argument("--sigma-noise", type=float, required=True)
    noise.add_argument("--trials", type=int, default=1000)
    sub.add_parser("show-plan", parents=[common], help="Print the parameter choice without sampling")
    sub.add_parser("version", help="Print the version")
    sub.add_parser("v", help="Print the version")
    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Parses arguments, dispatches the subcommand and returns the exit code."""
    args = _build_parser().parse_args(argv)
    if args.action in ["version", "v"]:
        print(version)
        return e_success

    _setup_logging("sincheb", logging.DEBUG if args.verbose else logging.WARNING)
    config = RunConfig.from_args(args)
    try:
        problem = parse_problem(args.problem, config.auto_normalize)
        if args.action == "run":
            return cmd_run(problem, config)
        if args.action == "sweep":
            return cmd_sweep(problem, config, args.axis, args.values)
        if args.action == "noise":
            return cmd_noise(problem, config, args.sigma_noise, args.trials)
        return cmd_show_plan(problem, config)
    except (SinchebError, OSError) as err:
        print(f"{cRed}Error: {err}{cReset}", file=sys.stderr)
        return e_validation


def main() -> None:
    """Entry point of the sincheb command."""
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
