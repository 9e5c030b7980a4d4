import warnings

import numpy as np
import pytest
from scipy import integrate

from core.exceptions import DomainError
from core.fresnel import (
    FRESNEL_DECAY_CONSTANT,
    FresnelEval,
    decay_constant,
    evaluate,
    fresnel_fr,
    fresnel_fr_erfc,
    fresnel_fr_quadrature,
    gauss_constant,
    half_line_gaussian_moments,
)


def test_gauss_constant():
    assert gauss_constant() == pytest.approx(np.sqrt(np.pi) * (1 - 1j), abs=1e-14)


def test_value_at_origin():
    assert fresnel_fr(0.0) == pytest.approx(0.5, abs=1e-9)
    assert evaluate(0.0).value == pytest.approx(0.5, abs=1e-9)


def test_decay_bound():
    assert decay_constant(1e3, 10_000) <= FRESNEL_DECAY_CONSTANT


@pytest.mark.parametrize("y", [0.0, 0.3, 1.0, 2.5, 7.0, 18.0, 33.3, 50.0])
def test_agrees_with_quadrature(y):
    assert abs(fresnel_fr(y) - fresnel_fr_quadrature(y)) < 1e-8


@pytest.mark.parametrize("y", [0.0, 2.5, 18.0, 50.0])
def test_quadrature_runs_without_integration_warnings(y):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        fresnel_fr_quadrature(y)


def test_erfc_identity():
    y = np.linspace(0.0, 20.0, 401)
    np.testing.assert_allclose(fresnel_fr(y), fresnel_fr_erfc(y), atol=1e-12)


def test_negative_argument_is_rejected():
    with pytest.raises(DomainError):
        fresnel_fr(-0.1)
    with pytest.raises(DomainError):
        FresnelEval(-1.0, 0.5)


def test_eval_bounds_the_value():
    with pytest.raises(DomainError):
        FresnelEval(1.0, 2.0 + 0j)


def test_large_argument_asymptotics():
    """Fr(y) ~ sqrt(i/2pi) e^{-iy^2/2} / (iy) for large y"""
    y = 400.0
    leading = np.exp(0.25j * np.pi) / np.sqrt(2 * np.pi) * np.exp(-0.5j * y * y) / (1j * y)
    assert abs(fresnel_fr(y) - leading) < 1e-6


@pytest.mark.parametrize("alpha, beta", [(0.5, 0.0), (0.5, 2.0j), (1.0 + 3.0j, -3.0j), (2.0 - 1.0j, 0.5)])
def test_half_line_moments_match_quadrature(alpha, beta):
    m0, m1 = half_line_gaussian_moments(alpha, beta)
    for k, value in ((0, m0), (1, m1)):
        def integrand(s, part):
            z = s ** k * np.exp(-alpha * s * s - beta * s)
            return z.real if part == 0 else z.imag
        real, _ = integrate.quad(integrand, 0, np.inf, args=(0,), epsabs=1e-13, epsrel=1e-12, limit=400)
        imag, _ = integrate.quad(integrand, 0, np.inf, args=(1,), epsabs=1e-13, epsrel=1e-12, limit=400)
        assert complex(value) == pytest.approx(real + 1j * imag, abs=1e-8)


def test_half_line_moments_need_decay():
    with pytest.raises(DomainError):
        half_line_gaussian_moments(-1.0 + 1j, 0.0)
