import asyncio
import json

import numpy as np
import pytest

from core.exceptions import InsufficientRun
from core.distorted_fourier import DistortedTransformPlan
from core.experiment_runner import (
    CONFIG_FILE,
    MONITOR_FILE,
    ExperimentRunner,
    analyze_run,
    run_batch,
    run_experiment,
    sweep,
)
from core.modified_scattering import extract_profile, profile_stability
from core.scattering_coefficients import ScatteringCoeffs
from models.simulation_models import MonitorReport, SimConfig
from processors.csv_report import COLUMNS, OBSERVABLES_FILE, ObservableReport
from processors.snapshot_io import INDEX_FILE, SnapshotStore
from utils.config_loader import load_config


def _small(tmp_path, name="run", **changes):
    values = dict(half_length=64.0, points=512, dt=0.1, t_max=2.0, epsilon=0.01,
                  output_dir=str(tmp_path / name))
    values.update(changes)
    return SimConfig(**values)


def test_zero_data_run(tmp_path):
    config = _small(tmp_path, epsilon=0.0)
    directory = run_experiment(config, progress=False)
    assert directory == tmp_path / "run"
    for name in (CONFIG_FILE, MONITOR_FILE, INDEX_FILE, OBSERVABLES_FILE):
        assert (directory / name).is_file(), name
    assert load_config(directory / CONFIG_FILE) == config

    frame = ObservableReport(directory).read()
    assert list(frame.columns) == COLUMNS
    assert frame["t"].iloc[0] == 0.0
    assert frame["t"].iloc[-1] == pytest.approx(2.0)
    for column in ("norm_u_inf", "norm_w_inf", "norm_w_h1", "w_at_zero_abs"):
        np.testing.assert_array_equal(frame[column], 0.0)
    # the run ends before any profile can be extracted
    assert frame["residual_vw"].isna().all()

    monitors = json.loads((directory / MONITOR_FILE).read_text())
    assert monitors["passed"]


def test_small_data_run_keeps_invariants(tmp_path):
    config = _small(tmp_path)
    runner = ExperimentRunner(config, progress=False)
    directory = runner.run()
    run, header = SnapshotStore(directory).load_run()
    assert header["q"] == config.q
    assert run[-1].t == pytest.approx(2.0)
    mass0 = run[0].norms.mass
    for snap in run:
        assert snap.norms.mass == pytest.approx(mass0, rel=1e-8)
        assert snap.norms.w_at_zero_abs <= 1e-5 * snap.norms.norm_w_h1
    frame = ObservableReport(directory).read()
    late = frame[frame["t"] > 1.0]
    assert late["g_cauchy_inf"].notna().all()


def test_analysis_needs_a_long_run(tmp_path):
    directory = run_experiment(_small(tmp_path), progress=False)
    with pytest.raises(InsufficientRun):
        analyze_run(directory)


def test_replay_is_deterministic(tmp_path):
    first = run_experiment(_small(tmp_path, "first"), progress=False)
    second = run_experiment(_small(tmp_path, "second"), progress=False)
    assert (first / OBSERVABLES_FILE).read_bytes() == (second / OBSERVABLES_FILE).read_bytes()


def test_batch_reports_failures_per_run(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    configs = [_small(tmp_path, "ok"), _small(tmp_path, "blocker")]
    outcomes = asyncio.run(run_batch(configs))
    assert outcomes[0].directory == tmp_path / "ok"
    assert outcomes[0].monitors.passed
    assert not outcomes[0].errors
    assert outcomes[1].directory is None
    assert outcomes[1].errors


def test_sweep_over_epsilon(tmp_path):
    frame = sweep(_small(tmp_path, "sweep"), "epsilon", [0.0, 0.01])
    assert list(frame["epsilon"]) == [0.0, 0.01]
    assert list(frame.columns[:2]) == ["epsilon", "output_dir"]
    assert (frame["error"] == "").all()
    assert frame["passed"].all()
    assert (tmp_path / "sweep" / "epsilon=0.0" / OBSERVABLES_FILE).is_file()


@pytest.mark.slow
def test_small_data_run_scatters(tmp_path):
    """Reduced-grid standard run to T = 64: decay, bounded monitors and profile rates"""
    config = SimConfig(half_length=256.0, points=8192, dt=0.05, t_max=64.0, epsilon=0.1,
                       output_dir=str(tmp_path / "scatter"))
    directory = run_experiment(config, progress=False)

    frame = ObservableReport(directory).read()
    at_one = frame.loc[np.isclose(frame["t"], 1.0), "sqrt_t_times_norm_u_inf"].iloc[0]
    assert (frame.loc[frame["t"] >= 1.0, "sqrt_t_times_norm_u_inf"] <= 2.0 * at_one).all()

    monitors = MonitorReport.model_validate_json((directory / MONITOR_FILE).read_text())
    assert monitors.passed
    for ratio in (monitors.w_inf_ratio, monitors.w_h1_ratio, monitors.decay_ratio, monitors.short_time_ratio):
        assert ratio <= 5.0

    summary = analyze_run(directory)
    assert summary.extraction_time == pytest.approx(64.0)
    assert summary.residual_fit.slope <= -0.1
    assert summary.g_cauchy_fit.slope <= -0.1
    assert summary.asymptotic_fit.slope <= -0.55
    assert len(summary.ode_mismatch) == 5
    assert max(summary.ode_mismatch.values()) <= 0.1

    run, _ = SnapshotStore(directory).load_run()
    plan = DistortedTransformPlan(run[0].u.grid, ScatteringCoeffs(config.q))
    early = extract_profile(run, plan, config.lam)
    r_half = early.residuals[np.isclose(early.times, 32.0)][0]
    assert profile_stability(run, plan, config.lam, 32.0, 64.0) <= 3.0 * r_half
