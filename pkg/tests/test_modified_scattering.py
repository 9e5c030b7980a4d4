import numpy as np
import pytest

from core.exceptions import GridMismatch, InsufficientRun, NonMonotoneTimes
from core.field_grid import GridSpec, position_field
from core.modified_scattering import (
    SMatrixField,
    _spot_indices,
    accumulate_g,
    assemble_A,
    bound_monitors,
    extract_profile,
    factorization_error,
    ode_consistency,
    predicted_solution,
    profile_stability,
    residual_region,
    to_f,
)
from core.propagator import EvolutionState, Snapshot, band_projection, linear_flow, make_snapshot
from models.simulation_models import NormRecord, ProfileFamily
from utils.initial_profiles import scaled_profile

DOUBLING = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0]


@pytest.fixture(scope="module")
def S(vplan):
    return SMatrixField.from_plan(vplan)


@pytest.fixture(scope="module")
def random_w(S):
    rng = np.random.default_rng(11)
    values = rng.normal(size=S.grid.points) + 1j * rng.normal(size=S.grid.points)
    return position_field(S.grid, values * np.exp(-S.grid.x ** 2 / 8))


def _odd_bump(t, y):
    return y * np.exp(-y ** 2)


def test_b_matrix_is_unitary(S):
    assert S.b_matrix.shape == (S.grid.points, 2, 2)
    assert S.unitarity_defect() < 1e-10


def test_a_matrix_is_hermitian(S, random_w):
    A = assemble_A(S, random_w)
    assert A.hermiticity_defect() < 1e-12
    np.testing.assert_allclose(A.matrix, np.conj(np.swapaxes(A.matrix, -1, -2)), atol=1e-12)


def test_b_diagonalizes_a(S, random_w):
    A = assemble_A(S, random_w)
    b = S.b_matrix
    diagonal = np.conj(np.swapaxes(b, -1, -2)) @ A.matrix @ b
    f1, f2 = to_f(S, random_w)
    scale = np.max(np.abs(random_w.values)) ** 2
    np.testing.assert_allclose(diagonal[:, 0, 0], np.abs(f1.values) ** 2, atol=1e-10 * scale)
    np.testing.assert_allclose(diagonal[:, 1, 1], np.abs(f2.values) ** 2, atol=1e-10 * scale)
    np.testing.assert_allclose(diagonal[:, 0, 1], 0.0, atol=1e-10 * scale)
    np.testing.assert_allclose(diagonal[:, 1, 0], 0.0, atol=1e-10 * scale)


def test_diagonal_variables_keep_pointwise_mass(S, random_w):
    f1, f2 = to_f(S, random_w)
    values = random_w.values
    mirrored = np.roll(values[::-1], 1)
    np.testing.assert_allclose(np.abs(f1.values) ** 2 + np.abs(f2.values) ** 2,
                               np.abs(values) ** 2 + np.abs(mirrored) ** 2, rtol=1e-10, atol=1e-14)


def test_odd_profile_maps_to_itself(S):
    """For odd w, f1 = conj(S1 + S2) w and (S1 + S2) f1 = w"""
    w = position_field(S.grid, _odd_bump(0.0, S.grid.x))
    f1, _ = to_f(S, w)
    np.testing.assert_allclose((S.s1 + S.s2) * f1.values, w.values, atol=1e-12)


def test_foreign_grid_is_rejected(S):
    other = GridSpec(4.0, 64)
    with pytest.raises(GridMismatch):
        to_f(S, position_field(other, np.zeros(64)))


def test_g_equals_f_without_nonlinearity(vplan, S, synthetic_run):
    run = synthetic_run(vplan, [0.5, 1.0, 3.0, 9.0], lambda t, y: np.exp(-y ** 2) * (1 + y / t))
    series = accumulate_g(run, S, 0.0)
    np.testing.assert_array_equal(series.times, [1.0, 3.0, 9.0])
    for f1, g1, f2, g2 in zip(series.f1, series.g1, series.f2, series.g2):
        np.testing.assert_array_equal(g1, f1)
        np.testing.assert_array_equal(g2, f2)


def test_g_phase_for_a_frozen_profile(vplan, S, synthetic_run):
    lam = -1.0
    run = synthetic_run(vplan, [1.0, 2.0, 5.0, 20.0], lambda t, y: np.exp(-y ** 2) * (1 + 0.3j * y))
    series = accumulate_g(run, S, lam)
    f1, f2 = series.f1[0], series.f2[0]
    for k, t in enumerate(series.times):
        np.testing.assert_allclose(series.g1[k], np.exp(1j * lam * np.abs(f1) ** 2 * np.log(t)) * f1, atol=1e-12)
        np.testing.assert_allclose(series.g2[k], np.exp(1j * lam * np.abs(f2) ** 2 * np.log(t)) * f2, atol=1e-12)


def test_cauchy_differences_vanish_for_a_frozen_linear_run(vplan, S, synthetic_run):
    run = synthetic_run(vplan, [1.0, 2.0, 4.0], lambda t, y: np.exp(-y ** 2))
    gaps = accumulate_g(run, S, 0.0).cauchy_differences(residual_region(S.grid))
    assert gaps.shape == (2,)
    np.testing.assert_array_equal(gaps, 0.0)


def test_non_monotone_snapshots_are_rejected(vplan, S, synthetic_run):
    run = synthetic_run(vplan, [1.0, 4.0, 2.0], lambda t, y: np.exp(-y ** 2))
    with pytest.raises(NonMonotoneTimes):
        accumulate_g(run, S, 0.0)


def test_extraction_needs_a_late_snapshot(vplan, synthetic_run):
    run = synthetic_run(vplan, [1.0, 2.0, 4.0, 8.0, 16.0, 32.0], _odd_bump)
    with pytest.raises(InsufficientRun):
        extract_profile(run, vplan, -1.0)
    with pytest.raises(InsufficientRun):
        extract_profile(synthetic_run(vplan, DOUBLING, _odd_bump), vplan, -1.0, extraction_time=100.0)


def test_extracted_profile_of_a_frozen_odd_run(vplan, synthetic_run):
    run = synthetic_run(vplan, DOUBLING, _odd_bump)
    result = extract_profile(run, vplan, 0.0)
    assert result.extraction_time == 128.0
    np.testing.assert_allclose(result.profile.values, _odd_bump(0.0, result.profile.grid.x), atol=1e-12)
    np.testing.assert_array_equal(result.times, DOUBLING)
    assert result.residuals.shape == (len(DOUBLING),)
    # only five snapshots fall inside [T/16, T]
    assert result.fit is None
    assert result.notes


def test_profile_stability_of_a_frozen_run(vplan, synthetic_run):
    run = synthetic_run(vplan, DOUBLING, _odd_bump)
    assert profile_stability(run, vplan, 0.0, 64.0, 128.0) == 0.0
    with pytest.raises(InsufficientRun):
        profile_stability(run, vplan, 0.0, 50.0, 128.0)


def test_ode_consistency_of_a_frozen_linear_run(vplan, synthetic_run):
    run = synthetic_run(vplan, [1.0, 2.0, 3.0, 5.0, 8.0], _odd_bump)
    mismatches = ode_consistency(run, vplan, 0.0, spots=3)
    assert sorted(mismatches) == [2.0, 3.0, 5.0]
    for value in mismatches.values():
        assert value == pytest.approx(0.0, abs=1e-10)


def test_predicted_solution_at_unit_time(vplan):
    grid = vplan.grid.dual()
    W = position_field(grid, np.exp(-grid.x ** 2 / 2))
    target = GridSpec(8.0, 4096)
    predicted = predicted_solution(W, 1.0, -1.0, target)
    x = target.x
    expected = np.exp(0.5j * x ** 2) * np.exp(-x ** 2 / 2) / np.sqrt(1j)
    np.testing.assert_allclose(predicted.values, expected, atol=1e-10)


def _snapshot(t, w_inf, w_h1, u_inf):
    grid = GridSpec(4.0, 8)
    zero = position_field(grid, np.zeros(8))
    record = NormRecord(norm_u_inf=u_inf, norm_u_h1=1.0, norm_w_inf=w_inf, norm_w_h1=w_h1,
                        w_at_zero_abs=0.0, mass=0.0, energy=0.0)
    return Snapshot(t, zero, zero, record)


def test_bound_monitors():
    run = [_snapshot(0.0, 0.1, 0.1, 0.1), _snapshot(3.0, 0.12, 0.2, 0.05)]
    report = bound_monitors(run, 0.1, 0.05)
    assert report.w_inf_ratio == pytest.approx(1.2)
    assert report.w_h1_ratio == pytest.approx(10.0 ** -0.025 * 2.0)
    assert report.decay_ratio == pytest.approx(1.0)
    assert report.passed

    loud = bound_monitors([_snapshot(0.0, 1.0, 1.0, 1.0)], 0.1, 0.05)
    assert not loud.passed


def test_bound_monitors_without_data():
    report = bound_monitors([_snapshot(0.0, 0.0, 0.0, 0.0)], 0.0, 0.05)
    assert report.passed
    assert report.w_inf_ratio == 0.0


def test_spot_indices():
    assert _spot_indices(1, 3, 5) == [1, 2, 3]
    assert _spot_indices(0, 100, 5) == [0, 25, 50, 75, 100]
    assert _spot_indices(2, 1, 5) == []


def test_linear_solution_factorizes(coarse_plan, coarse_grid):
    # t dy equals dx, so the dilation lands on profile nodes
    t = coarse_grid.dx / coarse_grid.dual().dx
    u0 = band_projection(coarse_plan, scaled_profile(coarse_grid, ProfileFamily.GAUSSIAN, 0.1))
    snap = make_snapshot(EvolutionState(t, linear_flow(coarse_plan, u0, t), coarse_plan, 0.0))
    assert factorization_error(snap, coarse_plan) < 1e-4
