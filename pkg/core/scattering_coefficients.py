"""
Scattering Data of the Repulsive Delta Potential

Closed-form transmission and reflection coefficients of H = -1/2 d^2/dx^2 + q delta,
the Jost functions, the distorted Fourier kernel K and the S-vector. Every
evaluation is vectorized over numpy arrays.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.exceptions import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScatteringCoeffs:
    """Scattering data for a fixed coupling q > 0"""
    q: float

    def __post_init__(self):
        if not self.q > 0:
            raise DomainError(f"q must be > 0 (repulsive case), got {self.q}")

    def transmission(self, xi):
        """T(xi) = i xi / (i xi - q)"""
        xi = np.asarray(xi, dtype=float)
        return 1j * xi / (1j * xi - self.q)

    def reflection(self, xi):
        """R(xi) = q / (i xi - q)"""
        xi = np.asarray(xi, dtype=float)
        return self.q / (1j * xi - self.q)

    def coefficient_derivative(self, xi):
        """dT/dxi = dR/dxi = -i q / (i xi - q)^2"""
        xi = np.asarray(xi, dtype=float)
        return -1j * self.q / (1j * xi - self.q) ** 2

    def s_vector(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """S(x) = (T(|x|), R(|x|))"""
        magnitude = np.abs(np.asarray(x, dtype=float))
        return self.transmission(magnitude), self.reflection(magnitude)

    def jost(self, sign: str, x, xi):
        """
        Jost functions f_+ and f_-, normalized by f(0, xi) = 1.

        f_+(x, xi) is e^{ix xi} for x >= 0 and (1/T) e^{ix xi} + (R/T) e^{-ix xi}
        for x < 0; f_-(x, xi) = f_+(-x, xi). At xi = 0 the x-continuous
        extension 1 + 2q|x| (x on the scattering side) is returned.
        """
        if sign not in ("plus", "minus"):
            raise DomainError(f"sign must be 'plus' or 'minus', got {sign!r}")
        x = np.asarray(x, dtype=float)
        if sign == "minus":
            x = -x
        xi = np.asarray(xi, dtype=float)
        x, xi = np.broadcast_arrays(x, xi)

        with np.errstate(divide="ignore", invalid="ignore"):
            t = self.transmission(xi)
            r = self.reflection(xi)
            scattered = (np.exp(1j * x * xi) + r * np.exp(-1j * x * xi)) / t
            # xi -> 0 limit of the x < 0 branch
            at_zero = 1.0 - 2.0 * self.q * x
        left = np.where(xi == 0.0, at_zero, scattered)
        return np.where(x >= 0.0, np.exp(1j * x * xi), left)

    def kernel_K(self, x, xi):
        """K(x, xi) = e^{ix xi} + R(|xi|) e^{i|x||xi|} for xi != 0, and K(x, 0) = 0"""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        magnitude = np.abs(xi)
        kernel = np.exp(1j * x * xi) + self.reflection(magnitude) * np.exp(1j * np.abs(x) * magnitude)
        return np.where(xi == 0.0, 0.0 + 0.0j, kernel)


def transmission(c: ScatteringCoeffs, xi):
    return c.transmission(xi)


def reflection(c: ScatteringCoeffs, xi):
    return c.reflection(xi)


def s_vector(c: ScatteringCoeffs, x):
    return c.s_vector(x)


def jost(c: ScatteringCoeffs, sign: str, x, xi):
    return c.jost(sign, x, xi)


def kernel_K(c: ScatteringCoeffs, x, xi):
    return c.kernel_K(x, xi)
