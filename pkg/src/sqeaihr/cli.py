"""Command-line front end: analyze, simulate, ensemble, sweep and replicate.

Exit codes: 0 success, 2 usage or parse error, 3 parameter validation error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import AnalysisReport, DfeConvention, analyze, compute_r0
from .config import ConfigError, EnsembleSpec, ScenarioConfig, SweepSpec, parse_config, render_config
from .ensemble import EnsembleSummary, run_ensemble, summarize
from .integrators import IntegrationError, SeedSpec, Trajectory, integrate_ode, integrate_sde
from .model import COMPARTMENTS, NoiseIntensities, ParameterError
from .scenarios import FIGURE_IDS, figure_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

TRAJECTORY_HEADER = "time," + ",".join(COMPARTMENTS)
ENSEMBLE_HEADER = "time,stat," + ",".join(COMPARTMENTS)
SWEEP_HEADER = "sweep_param,sweep_value,time,I_total"


def _fmt(x) -> str:
    return repr(float(x))


def _row(values) -> str:
    return ",".join(_fmt(v) for v in values)


# --- CSV rendering ---------------------------------------------------------


def trajectory_csv(times: np.ndarray, states: np.ndarray) -> str:
    lines = [TRAJECTORY_HEADER]
    lines.extend(_row((t, *x)) for t, x in zip(times, states))
    return "\n".join(lines) + "\n"


def ensemble_csv(summary: EnsembleSummary) -> str:
    lines = [ENSEMBLE_HEADER]
    for k, t in enumerate(summary.grid):
        for stat, table in (("mean", summary.mean_path), ("q05", summary.q05), ("q95", summary.q95)):
            lines.append(f"{_fmt(t)},{stat},{_row(table[k])}")
    return "\n".join(lines) + "\n"


def sweep_csv(target: str, results) -> str:
    lines = [SWEEP_HEADER]
    for value, times, totals in results:
        lines.extend(f"{target},{_fmt(value)},{_fmt(t)},{_fmt(y)}" for t, y in zip(times, totals))
    return "\n".join(lines) + "\n"


# --- runners -----------------------------------------------------------------


def simulate(config: ScenarioConfig, seed: Optional[int] = None) -> Trajectory:
    """One trajectory: RK4 without a noise section, seeded EM (path 0) with one."""
    if config.noise is None:
        return integrate_ode(config.parameters, config.initial_state, config.integrator)
    if seed is None:
        seed = config.ensemble.master_seed if config.ensemble else 0
    return integrate_sde(config.parameters, config.noise, config.initial_state, config.integrator, SeedSpec(seed, 0))


def ensemble(config: ScenarioConfig, params=None, workers: int = 1) -> EnsembleSummary:
    """Ensemble summary; without a noise section every path is the RK4 trajectory."""
    params = params if params is not None else config.parameters
    spec = config.ensemble or EnsembleSpec()
    if config.noise is None:
        traj = integrate_ode(params, config.initial_state, config.integrator)
        paths = np.broadcast_to(traj.states, (spec.n_paths,) + traj.states.shape)
        return summarize(traj.times, np.ascontiguousarray(paths))
    return run_ensemble(
        params, config.noise, config.initial_state, config.integrator, spec.master_seed, spec.n_paths, workers=workers
    )


def sweep(config: ScenarioConfig, workers: int = 1):
    """``[(value, times, I_total)]`` per sweep value.

    Deterministic scenarios give the RK4 path; stochastic ones give the ensemble
    mean of E + A + I (one path when no ensemble section is present).
    """
    if config.sweep is None:
        raise ConfigError("no sweep section in the configuration")
    all_params = [config.sweep_parameters(v) for v in config.sweep.values]
    results = []
    for value, params in zip(config.sweep.values, all_params):
        if config.noise is None:
            traj = integrate_ode(params, config.initial_state, config.integrator)
            results.append((value, traj.times, traj.infected))
        else:
            cfg = config if config.ensemble else config.replace(ensemble=EnsembleSpec(1, 0))
            summary = ensemble(cfg, params, workers)
            results.append((value, summary.grid, summary.mean_path[:, 2:5].sum(axis=1)))
    return results


# --- text reports ---------------------------------------------------------------


def render_analysis(params, noise: Optional[NoiseIntensities], convention: DfeConvention) -> str:
    report: AnalysisReport = analyze(params, noise, convention)
    th = report.thresholds
    ext, per = th.extinction, th.persistence
    out = io.StringIO()

    def line(key, value):
        out.write(f"{key}: {value if isinstance(value, str) else _fmt(value)}\n")

    line("dfe_convention", str(convention))
    line("S_o", report.s_o)
    line("Q_o", report.q_o)
    if not convention.is_formula:
        line("S_o_formula", report.dfe.s_o)
        line("Q_o_formula", report.dfe.q_o)
    line("R0", report.r0)
    if not convention.is_formula:
        line("R0_formula", report.r0_formula)
    if report.endemic is None:
        line("endemic", "none")
    else:
        line("endemic", " ".join(f"{name}={_fmt(v)}" for name, v in zip(COMPARTMENTS, report.endemic)))
    line("dfe_spectral_bound", report.dfe_spectral_bound)
    line("half_max_noise_sq", ext.half_max_noise_sq)
    line("min_infected_noise_sq", ext.min_infected_noise_sq)
    line("extinction_exponent", ext.exponent)
    line("extinction_guaranteed", str(ext.extinction_guaranteed).lower())
    line("alpha_hat", per.alpha_hat)
    line("rho1_alpha_hat", per.rho1_at_hat)
    line("rho2", per.rho2)
    line("persistence_margin", per.margin)
    line("persistence_guaranteed", str(per.persistent).lower())
    return out.getvalue()


def render_metrics(config: ScenarioConfig, summary: EnsembleSummary) -> str:
    spec = config.ensemble or EnsembleSpec()
    pv = summary.persistence_values
    rows = [
        ("n_paths", str(summary.n_paths)),
        ("master_seed", str(spec.master_seed)),
        ("extinction_threshold", _fmt(summary.extinction_threshold)),
        ("extinction_fraction", _fmt(summary.extinction_fraction)),
        ("slope_mean", _fmt(summary.slope_mean)),
        ("slope_std", _fmt(summary.slope_std)),
        ("n_already_extinct", str(summary.n_already_extinct)),
        ("persistence_tail_fraction", _fmt(summary.tail_fraction)),
        ("persistence_min", _fmt(pv.min())),
        ("persistence_median", _fmt(np.median(pv))),
        ("persistence_positive_fraction", _fmt(np.mean(pv > 0))),
    ]
    return "".join(f"{k}: {v}\n" for k, v in rows)


def provenance(config: ScenarioConfig, title: str) -> str:
    conv = config.dfe_convention
    header = [f"# {title}", f"# dfe_convention = {conv}"]
    if not conv.is_formula:
        params = config.parameters
        header.append(
            "# note: S_o is pinned to the replication value; the closed form gives "
            f"S_o = {_fmt(DfeConvention().s_o(params))} "
            f"(R0 {_fmt(compute_r0(params, conv.override))} pinned vs "
            f"{_fmt(compute_r0(params, DfeConvention().s_o(params)))} closed form)"
        )
    return "\n".join(header) + "\n" + render_config(config)


# --- argument handling -----------------------------------------------------------


def _load(path: Optional[str]) -> ScenarioConfig:
    if path is None:
        return parse_config("")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config(text)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, newline="\n")


def _parse_values(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--values expects a comma list of numbers, got {text!r}") from None


def _cmd_analyze(args) -> None:
    config = _load(args.config)
    convention = DfeConvention.parse(args.dfe) if args.dfe else config.dfe_convention
    sys.stdout.write(render_analysis(config.parameters, config.noise, convention))


def _cmd_simulate(args) -> None:
    config = _load(args.config)
    traj = simulate(config, args.seed)
    _emit(trajectory_csv(traj.times, traj.states), args.out)


def _with_ensemble(config: ScenarioConfig, paths, seed) -> ScenarioConfig:
    spec = config.ensemble or EnsembleSpec()
    spec = EnsembleSpec(paths if paths is not None else spec.n_paths, seed if seed is not None else spec.master_seed)
    return config.replace(ensemble=spec)


def _cmd_ensemble(args) -> None:
    config = _with_ensemble(_load(args.config), args.paths, args.seed)
    summary = ensemble(config, workers=args.workers)
    csv, metrics = ensemble_csv(summary), render_metrics(config, summary)
    if args.out is None:
        sys.stdout.write(csv)
        sys.stderr.write(metrics)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ensemble.csv").write_text(csv, newline="\n")
        (out / "metrics.txt").write_text(metrics, newline="\n")


def _cmd_sweep(args) -> None:
    config = _load(args.config)
    if args.target or args.values:
        if not (args.target and args.values):
            raise ConfigError("--target and --values must be given together")
        config = config.replace(sweep=SweepSpec(args.target, _parse_values(args.values)))
    _emit(sweep_csv(config.sweep.target if config.sweep else "", sweep(config, args.workers)), args.out)


def _cmd_replicate(args) -> None:
    try:
        figure = figure_scenario(args.figure_id)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    out = Path(args.out or args.figure_id)
    out.mkdir(parents=True, exist_ok=True)
    for panel in figure.panels:
        config = panel.config
        if args.dfe:
            config = config.replace(dfe_convention=DfeConvention.parse(args.dfe))
        title = f"{figure.figure_id} / {panel.label}: {figure.description}"
        (out / f"{panel.label}.cfg").write_text(provenance(config, title), newline="\n")
        (out / f"{panel.label}_analysis.txt").write_text(
            render_analysis(config.parameters, config.noise, config.dfe_convention), newline="\n"
        )
        if config.sweep is not None:
            data = sweep_csv(config.sweep.target, sweep(config, args.workers))
            (out / f"{panel.label}_sweep.csv").write_text(data, newline="\n")
        elif config.noise is not None:
            summary = ensemble(config, workers=args.workers)
            (out / f"{panel.label}_ensemble.csv").write_text(ensemble_csv(summary), newline="\n")
            (out / f"{panel.label}_metrics.txt").write_text(render_metrics(config, summary), newline="\n")
        else:
            traj = simulate(config)
            (out / f"{panel.label}.csv").write_text(trajectory_csv(traj.times, traj.states), newline="\n")
        print(f"wrote {panel.label} to {out}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqeaihr", description="SQEAIHR epidemic model toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="equilibria, R0 and stochastic thresholds")
    p.add_argument("--config")
    p.add_argument("--dfe", help="formula | override:VALUE")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("simulate", help="one trajectory as CSV")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("ensemble", help="Monte Carlo summary CSV and metrics")
    p.add_argument("--config")
    p.add_argument("--paths", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for ensemble.csv and metrics.txt")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("sweep", help="I_total = E + A + I per value of beta2, lam or q")
    p.add_argument("--config")
    p.add_argument("--target", choices=("beta2", "lam", "q"))
    p.add_argument("--values")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("replicate", help="regenerate the data behind a figure")
    p.add_argument("figure_id", metavar="FIGID", help=", ".join(FIGURE_IDS))
    p.add_argument("--out")
    p.add_argument("--dfe", help="formula | override:VALUE")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_replicate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if isinstance(exc, IntegrationError):
            print("hint: the step size may be too large for these rates; lower integrator.dt or beta1", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # remaining value errors come from command-line values (e.g. --dfe, --paths)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    return EXIT_OK
