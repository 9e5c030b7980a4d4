#!/usr/bin/env python3
"""
dnls command line

Evolves the cubic NLS with a repulsive delta potential, verifies the distorted
Fourier transform and the V operators, extracts scattering profiles from
stored runs, and turns observable tables into plot data.

Usage:
    dnls evolve --config default --out runs/standard
    dnls verify-transform --q 1 --n 4096 --l 40
    dnls extract-profile runs/standard
    dnls report runs/standard
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from core.exceptions import DnlsError
from core.experiment_runner import analyze_run, run_experiment
from models.simulation_models import SimConfig
from processors.csv_report import ObservableReport
from processors.verification_suites import TransformSuite, VOperatorSuite
from utils.config_loader import apply_overrides, load_config

logger = logging.getLogger("dnls")

OUT_ENV = "DNLS_OUT"
DEFAULT_Q_VALUES = (0.5, 1.0, 2.0)

# CLI flag -> SimConfig field
FLAG_FIELDS = {
    "q": "q",
    "lam": "lam",
    "epsilon": "epsilon",
    "l": "half_length",
    "n": "points",
    "dt": "dt",
    "tmax": "t_max",
    "beta": "beta",
    "seed": "seed",
    "out": "output_dir",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file, or 'default'")
    parser.add_argument("--q", type=float, help="delta potential strength (> 0)")
    parser.add_argument("--lambda", dest="lam", type=float, help="nonlinearity coefficient")
    parser.add_argument("--epsilon", type=float, help="Sigma-norm of the initial data")
    parser.add_argument("--l", type=float, help="box half-length L")
    parser.add_argument("--n", type=int, help="grid points N (power of two)")
    parser.add_argument("--dt", type=float, help="Strang step")
    parser.add_argument("--tmax", type=float, help="final time")
    parser.add_argument("--beta", type=float, help="growth exponent beta in (0, 1/8)")
    parser.add_argument("--out", help="run directory (DNLS_OUT takes precedence)")
    parser.add_argument("--seed", type=int, help="seed for randomized batteries")
    parser.add_argument("--jobs", type=int, default=1, help="worker count for analysis")
    parser.add_argument("--verbose", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnls",
        description="Spectral toolkit for the 1d cubic NLS with a repulsive delta potential",
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    evolve = commands.add_parser("evolve", help="evolve, snapshot, analyze and write observables")
    _add_common(evolve)
    evolve.add_argument("--no-progress", action="store_true", help="hide the progress bar")

    transform = commands.add_parser("verify-transform", help="distorted Fourier transform checks")
    _add_common(transform)
    transform.add_argument("--no-oracle", action="store_true", help="skip the dense kernel comparison")

    vops = commands.add_parser("verify-vops", help="V operator approximant rates and H1 growth")
    _add_common(vops)

    extract = commands.add_parser("extract-profile", help="extract the scattering profile of a stored run")
    _add_common(extract)
    extract.add_argument("run_dir", nargs="?", help="run directory (defaults to --out)")

    report = commands.add_parser("report", help="write one plot data file per observable")
    _add_common(report)
    report.add_argument("run_dir", nargs="?", help="run directory (defaults to --out)")
    return parser


def resolve_config(args: argparse.Namespace) -> SimConfig:
    """Config file (or defaults) with command line flags and DNLS_OUT applied"""
    config = load_config(args.config)
    overrides: Dict[str, Optional[object]] = {
        field: getattr(args, flag, None) for flag, field in FLAG_FIELDS.items()
    }
    if os.environ.get(OUT_ENV):
        overrides["output_dir"] = os.environ[OUT_ENV]
    return apply_overrides(config, overrides)


def _run_directory(args: argparse.Namespace) -> Path:
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    if getattr(args, "run_dir", None):
        return Path(args.run_dir)
    return Path(resolve_config(args).output_dir)


def cmd_evolve(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    directory = run_experiment(config, progress=not args.no_progress, n_jobs=args.jobs)
    print(directory)
    return 0


def cmd_verify_transform(args: argparse.Namespace) -> int:
    half_length = args.l if args.l is not None else 40.0
    points = args.n if args.n is not None else 4096
    q_values = [args.q] if args.q is not None else list(DEFAULT_Q_VALUES)
    suite = TransformSuite(half_length, points, n_jobs=args.jobs, seed=resolve_config(args).seed)
    frame = suite.run(q_values, with_oracle=not args.no_oracle)
    with pd.option_context("display.max_columns", None, "display.width", 200):
        print(frame.to_string(index=False, float_format=lambda v: f"{v:.3e}"))
    return 1 if "error" in frame.columns and frame["error"].notna().any() else 0


def cmd_verify_vops(args: argparse.Namespace) -> int:
    q = args.q if args.q is not None else 1.0
    half_length = args.l if args.l is not None else 8.0
    points = args.n if args.n is not None else 16384
    t_max = args.tmax if args.tmax is not None else 100.0
    suite = VOperatorSuite(q, half_length, points)

    rate_times = np.geomspace(10.0, t_max, 6)
    growth_times = [t for t in (1.0, 10.0, 100.0, 1000.0) if t <= t_max]
    with pd.option_context("display.max_columns", None, "display.width", 200):
        print(suite.approximant_rates(rate_times).to_string(index=False, float_format=lambda v: f"{v:.4g}"))
        print()
        print(suite.growth_ratios(growth_times).to_string(index=False, float_format=lambda v: f"{v:.4g}"))
    return 0


def cmd_extract_profile(args: argparse.Namespace) -> int:
    summary = analyze_run(_run_directory(args), n_jobs=args.jobs)
    print(summary.model_dump_json(indent=2))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    report = ObservableReport(_run_directory(args))
    written: List[Path] = report.write_plot_data(report.read())
    for path in written:
        print(path)
    return 0


COMMANDS = {
    "evolve": cmd_evolve,
    "verify-transform": cmd_verify_transform,
    "verify-vops": cmd_verify_vops,
    "extract-profile": cmd_extract_profile,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except DnlsError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"dnls {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
