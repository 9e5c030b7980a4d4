"""
Oscillatory Special Functions

The Gaussian integral constant, the Fresnel-type boundary function Fr(y)
that describes the origin boundary layer of V(t), and half-line Gaussian
moments with complex parameters used for closed-form chirp convolutions.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import integrate, special

from core.exceptions import DomainError

logger = logging.getLogger(__name__)

# Measured constant of |Fr(y)| <= C0 / <y>
FRESNEL_DECAY_CONSTANT = 1.1

_SQRT_I_OVER_2PI = np.exp(0.25j * np.pi) / np.sqrt(2.0 * np.pi)


@dataclass
class FresnelEval:
    """Fr evaluated at one nonnegative argument"""
    y: float
    value: complex

    def __post_init__(self):
        if self.y < 0:
            raise DomainError(f"Fr is only used for y >= 0, got {self.y}")
        if not np.isfinite(self.value) or abs(self.value) > 1.01:
            raise DomainError(f"Fr({self.y}) = {self.value} violates |Fr| <= 1.01")


def gauss_constant() -> complex:
    """Integral of e^{-ix^2/2} over the real line, sqrt(2 pi / i) = sqrt(pi)(1 - i)"""
    return complex(np.sqrt(2.0 * np.pi / 1j))


def _require_nonnegative(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DomainError(f"Fr requires y >= 0, got min {float(np.min(y))}")
    return y


def fresnel_fr(y):
    """
    Fr(y) = sqrt(i/2pi) * integral of e^{-ix^2/2} over (-inf, -y].

    Assembled from scipy's real Fresnel integrals C and S:
    Fr(y) = 1/2 - sqrt(i/2pi) sqrt(pi) [C(y/sqrt(pi)) - i S(y/sqrt(pi))].
    """
    y = _require_nonnegative(y)
    s_part, c_part = special.fresnel(y / np.sqrt(np.pi))
    value = 0.5 - _SQRT_I_OVER_2PI * np.sqrt(np.pi) * (c_part - 1j * s_part)
    return value if value.ndim else complex(value)


def fresnel_fr_erfc(y):
    """Fr(y) = erfc(y sqrt(i/2)) / 2"""
    y = _require_nonnegative(y)
    value = 0.5 * special.erfc(y * np.exp(0.25j * np.pi) / np.sqrt(2.0))
    return value if value.ndim else complex(value)


def evaluate(y: float) -> FresnelEval:
    return FresnelEval(float(y), fresnel_fr(float(y)))


def fresnel_fr_quadrature(y: float) -> complex:
    """
    Reference value of Fr(y) by adaptive quadrature.

    With u = x^2/2 the tail integral becomes a Fourier integral of the smooth
    weight w(u) = (2u)^{-1/2}. The tail starts on a whole cycle u0 = 2 pi m and
    is integrated by parts once, leaving QUADPACK's QAWF the absolutely
    integrable weight w'(u) on [u0, inf).
    """
    y = float(_require_nonnegative(y))
    start = 2.0 * np.pi * np.ceil(max(0.5 * y * y, 1.0) / (2.0 * np.pi))

    def slope(u: float) -> float:
        return -(2.0 * u) ** -1.5

    options = dict(epsabs=1e-14, limlst=200)
    cos_part, _ = integrate.quad(slope, start, np.inf, weight="cos", wvar=1.0, **options)
    sin_part, _ = integrate.quad(slope, start, np.inf, weight="sin", wvar=1.0, **options)
    # e^{-i u0} = 1 on a cycle boundary
    total = -1j / np.sqrt(2.0 * start) - 1j * (cos_part - 1j * sin_part)

    if start > 0.5 * y * y:
        upper = np.sqrt(2.0 * start)
        real, _ = integrate.quad(lambda x: np.cos(0.5 * x * x), y, upper, epsabs=1e-14, limit=200)
        imag, _ = integrate.quad(lambda x: -np.sin(0.5 * x * x), y, upper, epsabs=1e-14, limit=200)
        total += real + 1j * imag

    return complex(_SQRT_I_OVER_2PI * total)


def decay_constant(y_max: float = 1e3, samples: int = 10_000) -> float:
    """Measured sup of |Fr(y)| <y> over a uniform sample of [0, y_max]"""
    y = np.linspace(0.0, y_max, samples)
    return float(np.max(np.abs(fresnel_fr(y)) * np.sqrt(1.0 + y * y)))


def half_line_gaussian_moments(alpha, beta) -> Tuple[np.ndarray, np.ndarray]:
    """
    M_k(alpha, beta) = integral over s > 0 of s^k exp(-alpha s^2 - beta s), k = 0, 1.

    Valid for complex alpha with Re(alpha) > 0 and any complex beta, through
    M_0 = sqrt(pi/alpha)/2 * erfcx(beta / (2 sqrt(alpha))) and
    M_1 = (1 - beta M_0) / (2 alpha). erfcx stays bounded whenever
    Re(beta^2 / alpha) <= 0, which covers every use in this package.
    """
    alpha = np.asarray(alpha, dtype=np.complex128)
    beta = np.asarray(beta, dtype=np.complex128)
    if np.any(alpha.real <= 0):
        raise DomainError("half-line Gaussian moments need Re(alpha) > 0")
    root = np.sqrt(alpha)
    m0 = 0.5 * np.sqrt(np.pi) / root * special.erfcx(beta / (2.0 * root))
    m1 = (1.0 - beta * m0) / (2.0 * alpha)
    return m0, m1
