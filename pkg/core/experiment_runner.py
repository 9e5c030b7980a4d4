"""
Experiment Orchestration

Evolve -> snapshot -> analyze -> fit for one configuration, batches of
independent configurations, and parameter sweeps.
"""

import asyncio
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from core.distorted_fourier import DistortedTransformPlan
from core.exceptions import DnlsError, InvariantViolation
from core.field_grid import GridSpec
from core.modified_scattering import (
    SMatrixField,
    accumulate_g,
    asymptotic_fit,
    asymptotic_residuals,
    bound_monitors,
    extract_profile,
    ode_consistency,
    residual_region,
)
from core.propagator import Snapshot, SplitStepSolver, h1_apriori_ratio, snapshot_times
from core.scattering_coefficients import ScatteringCoeffs
from models.simulation_models import MonitorReport, ProfileSummary, SimConfig
from processors.csv_report import ObservableReport
from processors.rate_fitting import fit_rate
from processors.snapshot_io import SnapshotStore
from utils.config_loader import apply_overrides, config_hash, load_config, serialize_config
from utils.initial_profiles import initial_data

CONFIG_FILE = "config.txt"
PROFILE_FILE = "profile.json"
MONITOR_FILE = "monitors.json"

# Relative size of |w(t, 0)| tolerated against |w|_H1
W_ORIGIN_TOLERANCE = 1e-5
H1_APRIORI_LIMIT = 3.0
SMALL_DATA = 0.1


@dataclass
class RunOutcome:
    """Result of one configuration inside a batch or sweep"""
    config: SimConfig
    directory: Optional[Path] = None
    monitors: Optional[MonitorReport] = None
    elapsed: float = 0.0
    errors: List[str] = field(default_factory=list)


class ExperimentRunner:
    """Runs a SimConfig end to end and writes its run directory"""

    def __init__(self, config: SimConfig, progress: bool = True, n_jobs: int = 1):
        self.config = config
        self.progress = progress
        self.n_jobs = n_jobs
        self.grid = GridSpec(config.half_length, config.points)
        self.plan = DistortedTransformPlan(self.grid, ScatteringCoeffs(config.q))
        self.logger = logging.getLogger(__name__)

    def evolve(self) -> List[Snapshot]:
        config = self.config
        u0 = initial_data(config, self.grid)
        solver = SplitStepSolver(self.plan, config.lam, config.dt, progress=self.progress)
        times = snapshot_times(config.t_max, config.snapshot_exponent)
        return solver.run(u0, times)

    def check_invariants(self, run: Sequence[Snapshot]) -> None:
        for snap in run:
            scale = snap.norms.norm_w_h1
            if scale and snap.norms.w_at_zero_abs > W_ORIGIN_TOLERANCE * scale:
                raise InvariantViolation(
                    f"|w(t,0)| = {snap.norms.w_at_zero_abs:.3e} at t={snap.t:.3f} "
                    f"exceeds {W_ORIGIN_TOLERANCE:.0e} |w|_H1"
                )
        ratio = h1_apriori_ratio(run)
        if self.config.epsilon <= SMALL_DATA and ratio > H1_APRIORI_LIMIT:
            raise InvariantViolation(f"sup |u|_H1 / |u0|_H1 = {ratio:.2f} exceeds {H1_APRIORI_LIMIT}")

    def observables(self, run: Sequence[Snapshot]) -> pd.DataFrame:
        """One CSV row per snapshot; analysis columns are empty where undefined"""
        config = self.config
        S = SMatrixField.from_plan(self.plan)
        cauchy: Dict[float, float] = {}
        series = accumulate_g(run, S, config.lam)
        region = residual_region(S.grid)
        for t, gap in zip(series.times[1:], series.cauchy_differences(region)):
            cauchy[float(t)] = float(gap)

        residual_vw: Dict[float, float] = {}
        residual_thm: Dict[float, float] = {}
        try:
            profile = extract_profile(run, self.plan, config.lam, n_jobs=self.n_jobs)
            residual_vw = dict(zip(profile.times.tolist(), profile.residuals.tolist()))
            times, values = asymptotic_residuals(run, profile.profile, config.lam, n_jobs=self.n_jobs)
            residual_thm = dict(zip(times.tolist(), values.tolist()))
        except DnlsError as e:
            self.logger.warning(f"Profile residuals skipped: {str(e)}")

        rows = []
        for snap in run:
            rows.append({
                "t": snap.t,
                "norm_u_inf": snap.norms.norm_u_inf,
                "sqrt_t_times_norm_u_inf": np.sqrt(snap.t) * snap.norms.norm_u_inf,
                "norm_w_inf": snap.norms.norm_w_inf,
                "norm_w_h1": snap.norms.norm_w_h1,
                "w_at_zero_abs": snap.norms.w_at_zero_abs,
                "g_cauchy_inf": cauchy.get(snap.t, np.nan),
                "residual_vw": residual_vw.get(snap.t, np.nan),
                "residual_thm": residual_thm.get(snap.t, np.nan),
            })
        return ObservableReport.build_frame(rows)

    def run(self, out_dir: Optional[Path] = None) -> Path:
        """Evolve, persist and analyze; returns the run directory"""
        start = time.time()
        directory = Path(out_dir or self.config.output_dir)
        try:
            # Step 1: evolve through the snapshot schedule
            self.logger.info(f"Starting run q={self.config.q} lambda={self.config.lam} "
                             f"epsilon={self.config.epsilon} L={self.grid.half_length} N={self.grid.points}")
            run = self.evolve()

            # Step 2: persist configuration and snapshots
            directory.mkdir(parents=True, exist_ok=True)
            (directory / CONFIG_FILE).write_text(serialize_config(self.config), encoding="utf-8")
            SnapshotStore(directory).save_run(run, self.config.q, self.config.lam)

            # Step 3: invariants and monitors
            self.check_invariants(run)
            monitors = bound_monitors(run, self.config.epsilon, self.config.beta)
            (directory / MONITOR_FILE).write_text(monitors.model_dump_json(indent=2), encoding="utf-8")
            if self.config.epsilon <= SMALL_DATA and not monitors.passed:
                raise InvariantViolation(f"bound monitors exceed {monitors.threshold}: "
                                         f"{monitors.model_dump()}")

            # Step 4: observables table
            report = ObservableReport(directory)
            report.write(self.observables(run))

            self.logger.info(f"Run finished in {time.time() - start:.1f}s -> {directory}")
            return directory

        except Exception as e:
            self.logger.error(f"Run failed: {str(e)}")
            raise


def run_experiment(config: SimConfig, out_dir: Optional[Path] = None, progress: bool = True,
                   n_jobs: int = 1) -> Path:
    return ExperimentRunner(config, progress=progress, n_jobs=n_jobs).run(out_dir)


def analyze_run(directory: Path, n_jobs: int = 1) -> ProfileSummary:
    """Extract W from a stored run and fit its residual rates"""
    directory = Path(directory)
    config = load_config(directory / CONFIG_FILE)
    run, _ = SnapshotStore(directory).load_run()
    plan = DistortedTransformPlan(run[0].u.grid, ScatteringCoeffs(config.q))
    S = SMatrixField.from_plan(plan)

    profile = extract_profile(run, plan, config.lam, n_jobs=n_jobs)
    notes = list(profile.notes)
    notes.append("residuals use |x| <= 0.8 L and |y| <= 0.8 xi_max")

    asymptotic = None
    try:
        asymptotic = asymptotic_fit(run, profile.profile, config.lam, n_jobs=n_jobs)
    except DnlsError as e:
        notes.append(f"asymptotic fit unavailable: {e}")

    g_fit = None
    series = accumulate_g(run, S, config.lam)
    gaps = series.cauchy_differences(residual_region(S.grid))
    try:
        g_fit = fit_rate(series.times[1:], gaps)
    except DnlsError as e:
        notes.append(f"g Cauchy fit unavailable: {e}")

    summary = ProfileSummary(
        extraction_time=profile.extraction_time,
        half_length=plan.grid.half_length,
        points=plan.grid.points,
        beta=config.beta,
        config_hash=config_hash(config),
        w_inf=float(np.max(np.abs(profile.profile.values))),
        residual_fit=profile.fit,
        g_cauchy_fit=g_fit,
        asymptotic_fit=asymptotic,
        ode_mismatch={str(t): m for t, m in ode_consistency(run, plan, config.lam).items()},
        notes=notes,
    )
    (directory / PROFILE_FILE).write_text(summary.model_dump_json(indent=2), encoding="utf-8")
    return summary


async def run_batch(configs: Sequence[SimConfig], progress: bool = False) -> List[RunOutcome]:
    """Run independent configurations concurrently; failures become error outcomes"""
    logger = logging.getLogger(__name__)

    async def one(config: SimConfig) -> RunOutcome:
        start = time.time()
        directory = await asyncio.to_thread(run_experiment, config, None, progress)
        monitors = MonitorReport.model_validate_json((directory / MONITOR_FILE).read_text())
        return RunOutcome(config, directory, monitors, time.time() - start)

    results = await asyncio.gather(*(one(c) for c in configs), return_exceptions=True)

    outcomes = []
    for config, result in zip(configs, results):
        if isinstance(result, Exception):
            logger.error(f"Run {config.output_dir} failed: {result}")
            outcomes.append(RunOutcome(config, errors=[str(result)]))
        else:
            outcomes.append(result)
    return outcomes


def _sweep_member(config: SimConfig) -> Dict[str, Any]:
    try:
        directory = run_experiment(config, progress=False)
        monitors = json.loads((directory / MONITOR_FILE).read_text())
        return {"output_dir": str(directory), **monitors, "error": ""}
    except DnlsError as e:
        return {"output_dir": config.output_dir, "error": str(e)}


def sweep(config: SimConfig, field_name: str, values: Sequence[Any], n_jobs: int = 1) -> pd.DataFrame:
    """Monitor reports for copies of config with one field varied"""
    members = []
    for value in values:
        update = {field_name: value, "output_dir": str(Path(config.output_dir) / f"{field_name}={value}")}
        members.append(apply_overrides(config, update))
    rows = Parallel(n_jobs=n_jobs)(delayed(_sweep_member)(member) for member in members)
    frame = pd.DataFrame(rows)
    frame[field_name] = list(values)
    return frame[[field_name] + [c for c in frame.columns if c != field_name]]
