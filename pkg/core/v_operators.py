"""
Profile Operators V(t) and V(t)^-1

V(t) factors the linear group as U(t) = M(t) D(t) V(t) F_q. Its kernel is

    [V(t) psi](x) = sqrt(it/2pi) * integral of e^{-it(x^2 + xi^2)/2} K(tx, xi) psi(xi) dxi

and V(t)^-1 = V(t)*. Both act on fields sampled on the profile grid (the
sorted dual frequencies). Four paths are provided:

* fast: the free chirp convolution G_t (Fourier multiplier e^{ik^2/2t}) of
  half-line recombinations of psi by (T, R), on a zero-padded box. The step
  and ramp at the origin are removed before the FFT and convolved in closed form.
* oracle: trapezoidal quadrature of the kernel with the endpoint term at
  the origin kink, guarded against unresolved phases.
* composition: D^-1 M^-1 F_q^-1 e^{-it xi^2/2} through the transform plan.
* approximant: the closed-form main terms T(|x|) psi + R(|x|) psi(-x) + 2 Fr(sqrt(t)|x|) psi(0).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np
from joblib import Parallel, delayed

from core.distorted_fourier import DistortedTransformPlan
from core.exceptions import DomainError, GridMismatch, OracleResolution, PreconditionViolation
from core.field_grid import (
    ComplexField,
    GridSpec,
    from_profile,
    norm,
    one_sided_derivatives,
    position_field,
    reflect,
    require_same_grid,
    to_profile,
    value_at_zero,
)
from core.fresnel import fresnel_fr, half_line_gaussian_moments
from core.propagator import demodulate, dilate, modulate, undilate
from core.scattering_coefficients import ScatteringCoeffs
from models.simulation_models import NormKind, VMode

logger = logging.getLogger(__name__)

# Largest kernel phase increment per profile cell the oracle accepts
ORACLE_PHASE_LIMIT = np.pi / 4
SUPPORT_CUTOFF = 1e-14


def profile_plan(coeffs: ScatteringCoeffs, profile_half_length: float, points: int,
                 **plan_options) -> DistortedTransformPlan:
    """Transform plan whose dual (profile) grid has the given half-length"""
    position = GridSpec(np.pi * points / (2.0 * profile_half_length), points)
    return DistortedTransformPlan(position, coeffs, **plan_options)


@dataclass
class VApplication:
    """V(t) and V(t)^-1 at one time on the profile grid of a plan"""
    t: float
    mode: VMode
    plan: DistortedTransformPlan
    oracle_window: Optional[float] = None
    n_jobs: int = 1
    grid: GridSpec = field(init=False)

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"V(t) needs t > 0, got {self.t}")
        self.mode = VMode(self.mode)
        self.logger = logging.getLogger(__name__)
        self.grid = self.plan.grid.dual()

        t, y = self.t, self.grid.x
        coeffs = self.plan.coeffs
        self.k0 = self.grid.origin_index
        self.transmission = coeffs.transmission(np.abs(y))
        self.reflection = coeffs.reflection(np.abs(y))
        self.fresnel = fresnel_fr(np.sqrt(t) * np.abs(y))

        # Chirp outputs live on the closed box y = -L .. L (N + 1 nodes)
        points, dy = self.grid.points, self.grid.dx
        self.closed_y = -self.grid.half_length + dy * np.arange(points + 1)
        self.closed_transmission = coeffs.transmission(np.abs(self.closed_y))
        self.closed_reflection = coeffs.reflection(np.abs(self.closed_y))
        padded_xi = 2.0 * np.pi * np.fft.fftfreq(2 * points, d=dy)
        self.chirp = np.exp(0.5j * padded_xi ** 2 / t)

        # Closed-form chirp convolutions of 1_{y>0} y^k e^{-y^2}, k = 0, 1
        closed = self.closed_y
        prefactor = np.sqrt(1j * t / (2.0 * np.pi)) * np.exp(-0.5j * t * closed ** 2)
        m0, m1 = half_line_gaussian_moments(1.0 + 0.5j * t, -1j * t * closed)
        self._step = prefactor * m0
        self._ramp = prefactor * m1
        m0c, m1c = half_line_gaussian_moments(1.0 - 0.5j * t, 1j * t * closed)
        self._step_conj = np.conj(prefactor) * m0c
        self._ramp_conj = np.conj(prefactor) * m1c

    # ------------------------------------------------------------------
    # Fast path

    def _half_line_chirp(self, samples: np.ndarray, conjugate: bool) -> np.ndarray:
        """
        G_t (or G_t*) of 1_{y>0} g on the closed box -L .. L, with g sampled
        at y = 0, dy, .., L - dy.

        The step and ramp at the origin are convolved in closed form; the
        smooth remainder sits on a zero-padded box [-2L, 2L), where the FFT
        convolution is linear over every target.
        """
        k0, points = self.k0, self.grid.points
        y_pos = self.grid.x[k0:]
        full = np.zeros(points, dtype=np.complex128)
        full[k0:] = samples
        g0 = samples[0]
        g1, _ = one_sided_derivatives(position_field(self.grid, full))

        padded = np.zeros(2 * points, dtype=np.complex128)
        padded[points:points + points // 2] = samples - (g0 + g1 * y_pos) * np.exp(-y_pos ** 2)
        multiplier = np.conj(self.chirp) if conjugate else self.chirp
        smooth = np.fft.ifft(multiplier * np.fft.fft(padded))[points // 2:points // 2 + points + 1]
        if conjugate:
            return smooth + g0 * self._step_conj + g1 * self._ramp_conj
        return smooth + g0 * self._step + g1 * self._ramp

    def _mirror(self, values: np.ndarray) -> np.ndarray:
        return np.roll(values[::-1], 1)

    def _fast_V(self, values: np.ndarray) -> np.ndarray:
        k0, points = self.k0, self.grid.points
        plus = values[k0:]
        minus = self._mirror(values)[k0:]
        trans, refl = self.transmission[k0:], self.reflection[k0:]

        right = self._half_line_chirp(trans * plus + refl * minus, conjugate=False)
        left = self._half_line_chirp(trans * minus + refl * plus, conjugate=False)
        from_minus = self._half_line_chirp(minus, conjugate=False)
        from_plus = self._half_line_chirp(plus, conjugate=False)

        nonnegative = right + from_minus[::-1]
        negative = left[::-1] + from_plus
        return np.where(self.closed_y >= 0, nonnegative, negative)[:points]

    def _fast_Vinv(self, values: np.ndarray) -> np.ndarray:
        k0, points = self.k0, self.grid.points
        plus = values[k0:]
        minus = self._mirror(values)[k0:]
        from_plus = self._half_line_chirp(plus, conjugate=True)
        from_minus = self._half_line_chirp(minus, conjugate=True)
        trans_bar = np.conj(self.closed_transmission)
        refl_bar = np.conj(self.closed_reflection)

        nonnegative = trans_bar * from_plus + from_minus[::-1] + refl_bar * from_minus
        negative = trans_bar * from_minus[::-1] + from_plus + refl_bar * from_plus[::-1]
        return np.where(self.closed_y >= 0, nonnegative, negative)[:points]

    # ------------------------------------------------------------------
    # Kernel oracle

    def _window(self, values: np.ndarray):
        y = self.grid.x
        magnitude = np.abs(values)
        peak = magnitude.max() if magnitude.size else 0.0
        support = magnitude > SUPPORT_CUTOFF * peak
        reach = float(np.max(np.abs(y[support]))) if peak > 0 else 0.0
        window = self.oracle_window if self.oracle_window is not None else reach
        targets = np.abs(y) <= window

        increment = self.t * (window + reach) * self.grid.dx
        if increment >= ORACLE_PHASE_LIMIT:
            raise OracleResolution(
                f"kernel phase step {increment:.3f} >= pi/4 at t={self.t} "
                f"(window {window:.2f}, support {reach:.2f}, cell {self.grid.dx:.2e})"
            )
        return support, targets

    def _kernel(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        t = self.t
        phase = np.exp(-0.5j * t * (x ** 2 + xi ** 2))
        return np.sqrt(1j * t / (2.0 * np.pi)) * phase * self.plan.coeffs.kernel_K(t * x, xi)

    def _corner_jump(self, values: np.ndarray, adjoint: bool) -> np.ndarray:
        """Jump across the origin of the derivative of the oracle integrand, per target"""
        t, y = self.t, self.grid.x
        coeffs = self.plan.coeffs
        prefactor = np.sqrt(1j * t / (2.0 * np.pi))
        at_zero = values[self.k0]
        if not adjoint:
            # K(X, 0) = 0, so only the kink of K in xi contributes
            return prefactor * np.exp(-0.5j * t * y ** 2) * (-2j / coeffs.q - 2j * t * np.abs(y)) * at_zero
        right, left = one_sided_derivatives(position_field(self.grid, values))
        eta = np.abs(y)
        refl_bar = np.conj(coeffs.reflection(eta))
        trans_bar = np.conj(coeffs.transmission(eta))
        return np.conj(prefactor) * np.exp(0.5j * t * y ** 2) * (
            -2j * t * eta * refl_bar * at_zero + trans_bar * (right - left)
        )

    def _oracle(self, values: np.ndarray, adjoint: bool) -> np.ndarray:
        y, dy = self.grid.x, self.grid.dx
        support, targets = self._window(values)
        source_nodes, target_nodes = y[support], np.flatnonzero(targets)
        source = values[support]

        def rows(block: np.ndarray) -> np.ndarray:
            if adjoint:
                kernel = np.conj(self._kernel(source_nodes[None, :], y[block, None]))
            else:
                kernel = self._kernel(y[block, None], source_nodes[None, :])
            return dy * (kernel @ source)

        blocks = np.array_split(target_nodes, max(1, target_nodes.size // 256))
        parts = Parallel(n_jobs=self.n_jobs, prefer="threads")(delayed(rows)(b) for b in blocks)
        out = np.zeros(self.grid.points, dtype=np.complex128)
        if target_nodes.size:
            out[target_nodes] = np.concatenate(parts)
            # Trapezoid endpoint term h^2/12 [f'] at the origin kink
            out[target_nodes] += dy ** 2 / 12.0 * self._corner_jump(values, adjoint)[target_nodes]
        return out

    # ------------------------------------------------------------------
    # Composition through the transform plan

    def _composition_V(self, psi: ComplexField) -> np.ndarray:
        plan = self.plan
        spectrum = from_profile(psi, plan.grid)
        rotated = spectrum.copy_with(np.exp(-0.5j * self.t * plan.grid.xi ** 2) * spectrum.values)
        u = plan.inverse(rotated)
        return undilate(demodulate(u, self.t), self.t, self.grid).values

    def _composition_Vinv(self, phi: ComplexField) -> np.ndarray:
        plan = self.plan
        u = modulate(dilate(phi, self.t, plan.grid), self.t)
        psi = plan.forward(u)
        return to_profile(psi.copy_with(np.exp(0.5j * self.t * plan.grid.xi ** 2) * psi.values)).values

    # ------------------------------------------------------------------
    # Approximants

    def approx_V(self, psi: ComplexField) -> ComplexField:
        """T(|x|) psi(x) + R(|x|) psi(-x) + 2 Fr(sqrt(t)|x|) psi(0)"""
        psi = self.as_profile(psi)
        values = (self.transmission * psi.values + self.reflection * reflect(psi).values
                  + 2.0 * self.fresnel * value_at_zero(psi))
        return psi.copy_with(values)

    def approx_Vinv(self, phi: ComplexField) -> ComplexField:
        """conj(T)(|xi|) phi(xi) + conj(R)(|xi|) phi(-xi) + 2 conj(Fr)(sqrt(t)|xi|) phi(0)"""
        phi = self.as_profile(phi)
        values = (np.conj(self.transmission) * phi.values + np.conj(self.reflection) * reflect(phi).values
                  + 2.0 * np.conj(self.fresnel) * value_at_zero(phi))
        return phi.copy_with(values)

    # ------------------------------------------------------------------

    def as_profile(self, f: ComplexField) -> ComplexField:
        """Accept profile-grid fields or frequency fields of the plan grid"""
        if not f.is_position and f.grid == self.plan.grid:
            return to_profile(f)
        if f.grid != self.grid:
            raise GridMismatch(f"field grid {f.grid} is neither the plan grid nor its profile grid")
        return f

    def apply_V(self, psi: ComplexField) -> ComplexField:
        psi = self.as_profile(psi)
        if self.mode == VMode.FAST:
            values = self._fast_V(psi.values)
        elif self.mode == VMode.ORACLE:
            values = self._oracle(psi.values, adjoint=False)
        elif self.mode == VMode.COMPOSITION:
            values = self._composition_V(psi)
        else:
            return self.approx_V(psi)
        return position_field(self.grid, values)

    def apply_Vinv(self, phi: ComplexField) -> ComplexField:
        phi = self.as_profile(phi)
        require_same_grid(phi, self.grid)
        if self.mode == VMode.FAST:
            values = self._fast_Vinv(phi.values)
        elif self.mode == VMode.ORACLE:
            values = self._oracle(phi.values, adjoint=True)
        elif self.mode == VMode.COMPOSITION:
            values = self._composition_Vinv(phi)
        else:
            return self.approx_Vinv(phi)
        return position_field(self.grid, values)


def apply_V(app: VApplication, psi: ComplexField) -> ComplexField:
    return app.apply_V(psi)


def apply_Vinv(app: VApplication, phi: ComplexField) -> ComplexField:
    return app.apply_Vinv(phi)


def approx_V(app: VApplication, psi: ComplexField) -> ComplexField:
    return app.approx_V(psi)


def approx_Vinv(app: VApplication, phi: ComplexField) -> ComplexField:
    return app.approx_Vinv(phi)


def h1_growth_check(app: VApplication, f: ComplexField, inverse: bool = False,
                    zero_tolerance: float = 1e-8) -> float:
    """
    Measured regularity ratio of V or V^-1.

    Forward: |V psi|_{H1dot} / |psi|_{H1}, defined only when psi(0) = 0.
    Inverse: |V^-1 phi|_{H1dot} / (t^{1/2} |phi(0)| + |phi|_{H1}).
    """
    f = app.as_profile(f)
    scale = norm(f, NormKind.H1)
    if scale == 0.0:
        return 0.0
    at_zero = abs(value_at_zero(f))
    if not inverse:
        if at_zero > zero_tolerance * scale:
            raise PreconditionViolation(
                f"H1 growth of V needs psi(0) = 0, got |psi(0)| = {at_zero:.3e}"
            )
        return norm(app.apply_V(f), NormKind.H1DOT) / scale
    return norm(app.apply_Vinv(f), NormKind.H1DOT) / (np.sqrt(app.t) * at_zero + scale)


def pointwise_bounds(app: VApplication, psi: ComplexField) -> Dict[str, float]:
    """
    Measured constants C of
    |V psi(0)| <= C (|psi(0)| + t^{-1/4} |psi|_{H1}) and
    |V psi|_inf <= C (|psi|_inf + t^{-1/4} |psi|_{H1}).
    """
    psi = app.as_profile(psi)
    image = app.apply_V(psi)
    decay = app.t ** -0.25 * norm(psi, NormKind.H1)
    at_zero_scale = abs(value_at_zero(psi)) + decay
    sup_scale = norm(psi, NormKind.LINF) + decay
    return {
        "at_zero": abs(value_at_zero(image)) / at_zero_scale if at_zero_scale else 0.0,
        "sup": norm(image, NormKind.LINF) / sup_scale if sup_scale else 0.0,
    }


def approximant_error(app: VApplication, f: ComplexField, inverse: bool = False,
                      region: Union[float, None] = None) -> float:
    """L-infinity gap between V (or V^-1) and its closed-form approximant"""
    f = app.as_profile(f)
    if inverse:
        gap = app.apply_Vinv(f).values - app.approx_Vinv(f).values
    else:
        gap = app.apply_V(f).values - app.approx_V(f).values
    if region is not None:
        gap = gap[np.abs(app.grid.x) <= region]
    return float(np.max(np.abs(gap))) if gap.size else 0.0
