import numpy as np
import pytest

from core.exceptions import NonPositiveValue, TooFewPoints
from processors.rate_fitting import MIN_FIT_POINTS, fit_rate


def test_exact_power_law():
    times = np.geomspace(1.0, 1000.0, 10)
    fit = fit_rate(times, 3.0 * times ** -0.75)
    assert fit.slope == pytest.approx(-0.75, abs=1e-10)
    assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-10)
    assert fit.max_residual < 1e-10
    assert fit.points == 10


def test_constant_series_has_zero_slope():
    times = np.linspace(1.0, 50.0, 8)
    assert fit_rate(times, np.full(8, 0.2)).slope == pytest.approx(0.0, abs=1e-12)


def test_noisy_decay_is_recovered():
    rng = np.random.default_rng(3)
    times = np.geomspace(10.0, 100.0, 12)
    values = times ** -0.25 * (1 + 0.01 * rng.standard_normal(12))
    assert fit_rate(times, values).slope == pytest.approx(-0.25, abs=0.05)


def test_window_selects_points():
    times = np.geomspace(1.0, 256.0, 9)
    values = np.where(times < 15.0, 1.0, times ** -0.5)
    with pytest.raises(TooFewPoints):
        fit_rate(times, values, (16.0, 256.0))
    times = np.geomspace(1.0, 256.0, 33)
    values = np.where(times < 15.0, 1.0, times ** -0.5)
    fit = fit_rate(times, values, (16.0, 256.0))
    assert fit.slope == pytest.approx(-0.5, abs=1e-10)
    assert (fit.t_lo, fit.t_hi) == (16.0, 256.0)
    assert fit.points == 17


def test_too_few_points():
    times = np.arange(1.0, MIN_FIT_POINTS)
    with pytest.raises(TooFewPoints):
        fit_rate(times, times)
    with pytest.raises(TooFewPoints):
        fit_rate([], [])


def test_non_positive_values():
    times = np.arange(1.0, 9.0)
    values = np.ones(8)
    values[3] = 0.0
    with pytest.raises(NonPositiveValue):
        fit_rate(times, values)
    values[3] = np.nan
    with pytest.raises(NonPositiveValue):
        fit_rate(times, values)
