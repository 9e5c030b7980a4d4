"""
Modified Scattering Analysis

Post-processing of an evolved run: the hermitian matrix A of the
approximate ODE for (w, w(-.)), its unitary diagonalizer B, the diagonal
variables f = B*(w, w(-.)), the phase-corrected g_j, the scattering profile W
and the residuals of the modified-scattering asymptotics.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from core.distorted_fourier import DistortedTransformPlan
from core.exceptions import GridMismatch, InsufficientRun, InvariantViolation, NonMonotoneTimes
from core.field_grid import (
    ComplexField,
    GridSpec,
    norm,
    position_field,
    to_profile,
    trig_interpolate,
)
from core.propagator import Snapshot, dilate, modulate, short_time_ratio
from core.v_operators import VApplication
from models.simulation_models import MonitorReport, NormKind, RateFit, VMode
from processors.rate_fitting import fit_rate

logger = logging.getLogger(__name__)

RESIDUAL_REGION = 0.8
MONITOR_THRESHOLD = 5.0
NONLINEAR_ESTIMATE_LIMIT = 10.0
MIN_EXTRACTION_TIME = 64.0
# Edge-to-sup ratio accepted for profile fields, whose algebraic tail reaches the band edge
PROFILE_BOUNDARY_TOLERANCE = 1e-2


@dataclass
class SMatrixField:
    """S = (T(|y|), R(|y|)) and B = [[S1, conj S2], [-S2, conj S1]] per profile node"""
    grid: GridSpec
    s1: np.ndarray
    s2: np.ndarray

    @classmethod
    def from_plan(cls, plan: DistortedTransformPlan) -> "SMatrixField":
        grid = plan.grid.dual()
        s1, s2 = plan.coeffs.s_vector(grid.x)
        return cls(grid, s1, s2)

    @property
    def b_matrix(self) -> np.ndarray:
        """Nodewise B with shape (N, 2, 2)"""
        return np.stack([
            np.stack([self.s1, np.conj(self.s2)], axis=-1),
            np.stack([-self.s2, np.conj(self.s1)], axis=-1),
        ], axis=-2)

    def unitarity_defect(self) -> float:
        b = self.b_matrix
        product = np.conj(np.swapaxes(b, -1, -2)) @ b
        return float(np.max(np.abs(product - np.eye(2))))


@dataclass
class AMatrixField:
    """Nodewise hermitian A = |S.w|^2 A1 + |S.w(-.)|^2 A2"""
    a11: np.ndarray
    a12: np.ndarray
    a21: np.ndarray
    a22: np.ndarray
    direct: np.ndarray
    mirrored: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([
            np.stack([self.a11, self.a12], axis=-1),
            np.stack([self.a21, self.a22], axis=-1),
        ], axis=-2)

    def hermiticity_defect(self) -> float:
        return float(max(np.max(np.abs(self.a21 - np.conj(self.a12))),
                         np.max(np.abs(self.a11.imag)), np.max(np.abs(self.a22.imag))))


@dataclass
class GSeries:
    """Phase-corrected g_j(t_k) together with the f_j they are built from"""
    times: np.ndarray
    f1: List[np.ndarray]
    f2: List[np.ndarray]
    g1: List[np.ndarray]
    g2: List[np.ndarray]

    def cauchy_differences(self, region: Optional[np.ndarray] = None) -> np.ndarray:
        """|g(t_k) - g(t_{k+1})|_inf over both components, one value per interval"""
        out = []
        for k in range(len(self.times) - 1):
            gap = np.maximum(np.abs(self.g1[k + 1] - self.g1[k]), np.abs(self.g2[k + 1] - self.g2[k]))
            out.append(np.max(gap if region is None else gap[region]))
        return np.asarray(out)


@dataclass
class ProfileResult:
    """Scattering profile W extracted at time T and its residual series"""
    profile: ComplexField
    extraction_time: float
    times: np.ndarray
    residuals: np.ndarray
    fit: Optional[RateFit] = None
    notes: List[str] = field(default_factory=list)


def residual_region(grid: GridSpec) -> np.ndarray:
    return np.abs(grid.x) <= RESIDUAL_REGION * grid.half_length


def _profile_values(S: SMatrixField, w: ComplexField) -> np.ndarray:
    if not w.is_position:
        w = to_profile(w)
    if w.grid != S.grid:
        raise GridMismatch(f"w lives on {w.grid}, S on {S.grid}")
    return w.values


def assemble_A(S: SMatrixField, w: ComplexField) -> AMatrixField:
    """Entries of A from (w, w(-.)) at one time"""
    values = _profile_values(S, w)
    mirrored_w = np.roll(values[::-1], 1)
    direct = np.abs(S.s1 * values + S.s2 * mirrored_w) ** 2
    mirrored = np.abs(S.s1 * mirrored_w + S.s2 * values) ** 2

    abs1, abs2 = np.abs(S.s1) ** 2, np.abs(S.s2) ** 2
    cross = np.conj(S.s1) * S.s2
    a11 = direct * abs1 + mirrored * abs2
    a22 = mirrored * abs1 + direct * abs2
    a12 = direct * cross + mirrored * np.conj(cross)
    a21 = mirrored * cross + direct * np.conj(cross)
    return AMatrixField(a11.astype(np.complex128), a12, a21, a22.astype(np.complex128), direct, mirrored)


def to_f(S: SMatrixField, w: ComplexField) -> Tuple[ComplexField, ComplexField]:
    """f = B* (w, w(-.)) nodewise"""
    values = _profile_values(S, w)
    mirrored_w = np.roll(values[::-1], 1)
    f1 = np.conj(S.s1) * values - np.conj(S.s2) * mirrored_w
    f2 = S.s2 * values + S.s1 * mirrored_w
    return position_field(S.grid, f1), position_field(S.grid, f2)


def _late(run: Sequence[Snapshot]) -> List[Snapshot]:
    late = [s for s in run if s.t >= 1.0]
    times = np.array([s.t for s in late])
    if np.any(np.diff(times) <= 0):
        raise NonMonotoneTimes("snapshots must be strictly increasing in t")
    return late


def accumulate_g(run: Sequence[Snapshot], S: SMatrixField, lam: float) -> GSeries:
    """g_j(t) = exp(i lam * integral_1^t |f_j(s)|^2 ds/s) f_j(t), trapezoid in log s"""
    late = _late(run)
    times = np.array([s.t for s in late])
    f1s, f2s, g1s, g2s = [], [], [], []
    phase1 = np.zeros(S.grid.points)
    phase2 = np.zeros(S.grid.points)
    for k, snap in enumerate(late):
        f1, f2 = to_f(S, snap.w)
        if k:
            step = np.log(times[k]) - np.log(times[k - 1])
            phase1 += 0.5 * step * (np.abs(f1s[-1]) ** 2 + np.abs(f1.values) ** 2)
            phase2 += 0.5 * step * (np.abs(f2s[-1]) ** 2 + np.abs(f2.values) ** 2)
        elif times[0] > 1.0:
            step = np.log(times[0])
            phase1 += step * np.abs(f1.values) ** 2
            phase2 += step * np.abs(f2.values) ** 2
        f1s.append(f1.values)
        f2s.append(f2.values)
        g1s.append(np.exp(1j * lam * phase1) * f1.values)
        g2s.append(np.exp(1j * lam * phase2) * f2.values)
    return GSeries(times, f1s, f2s, g1s, g2s)


def _scattering_profile(S: SMatrixField, snap: Snapshot, lam: float) -> ComplexField:
    f1, _ = to_f(S, snap.w)
    phi1 = np.exp(1j * lam * np.abs(f1.values) ** 2 * np.log(snap.t)) * f1.values
    return position_field(S.grid, (S.s1 + S.s2) * phi1)


def _profile_residual(plan: DistortedTransformPlan, snap: Snapshot, W: ComplexField, lam: float) -> float:
    app = VApplication(snap.t, VMode.FAST, plan)
    image = app.apply_V(snap.w).values
    target = np.exp(-1j * lam * np.abs(W.values) ** 2 * np.log(snap.t)) * W.values
    region = residual_region(W.grid)
    return float(np.max(np.abs(image - target)[region]))


def extract_profile(run: Sequence[Snapshot], plan: DistortedTransformPlan, lam: float,
                    extraction_time: Optional[float] = None, n_jobs: int = 1) -> ProfileResult:
    """W = (S1 + S2) e^{i lam |f1(T)|^2 log T} f1(T) and r(t) = |V(t)w(t) - e^{-i lam |W|^2 log t} W|_inf"""
    late = _late(run)
    if not late:
        raise InsufficientRun("no snapshots at t >= 1")
    by_time = {s.t: s for s in late}
    T = extraction_time if extraction_time is not None else late[-1].t
    if T < MIN_EXTRACTION_TIME or T not in by_time:
        raise InsufficientRun(f"profile extraction needs a snapshot at T >= {MIN_EXTRACTION_TIME}, got T={T}")

    S = SMatrixField.from_plan(plan)
    W = _scattering_profile(S, by_time[T], lam)
    used = [s for s in late if s.t <= T]
    residuals = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_profile_residual)(plan, s, W, lam) for s in used
    )
    times = np.array([s.t for s in used])
    residuals = np.asarray(residuals)
    result = ProfileResult(W, T, times, residuals)
    try:
        result.fit = fit_rate(times, residuals, (T / 16.0, T))
    except Exception as e:
        logger.warning(f"Residual rate fit failed: {str(e)}")
        result.notes.append(f"residual fit unavailable: {e}")
    return result


def predicted_solution(W: ComplexField, t: float, lam: float, target: GridSpec) -> ComplexField:
    """(it)^{-1/2} e^{ix^2/2t} W(x/t) e^{-i lam |W(x/t)|^2 log t} on target"""
    sampled = trig_interpolate(W, -target.half_length / t, target.dx / t, target.points)
    phased = sampled * np.exp(-1j * lam * np.abs(sampled) ** 2 * np.log(t))
    return modulate(position_field(target, phased / np.sqrt(1j * t)), t)


def asymptotic_residuals(run: Sequence[Snapshot], W: ComplexField, lam: float,
                         n_jobs: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    late = _late(run)
    if not late:
        raise InsufficientRun("no snapshots at t >= 1")
    grid = late[0].u.grid
    region = residual_region(grid)

    def residual(snap: Snapshot) -> float:
        predicted = predicted_solution(W, snap.t, lam, grid)
        return float(np.max(np.abs(snap.u.values - predicted.values)[region]))

    values = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(residual)(s) for s in late)
    return np.array([s.t for s in late]), np.asarray(values)


def asymptotic_fit(run: Sequence[Snapshot], W: ComplexField, lam: float,
                   window: Tuple[float, float] = (16.0, 256.0), n_jobs: int = 1) -> RateFit:
    """Log-log fit of |u(t) - (it)^{-1/2} e^{ix^2/2t} W(x/t) e^{-i lam |W|^2 log t}|_inf"""
    times, values = asymptotic_residuals(run, W, lam, n_jobs=n_jobs)
    if times.size == 0 or times[-1] < window[0]:
        raise InsufficientRun(f"run ends before the fit window {window}")
    hi = min(window[1], float(times[-1]))
    return fit_rate(times, values, (window[0], hi))


def factorization_error(snap: Snapshot, plan: DistortedTransformPlan) -> float:
    """|u(t) - M(t) D(t) V(t) w(t)|_inf over the residual region"""
    app = VApplication(snap.t, VMode.FAST, plan)
    dilated = dilate(app.apply_V(snap.w), snap.t, plan.grid, PROFILE_BOUNDARY_TOLERANCE)
    rebuilt = modulate(dilated, snap.t)
    region = residual_region(plan.grid)
    return float(np.max(np.abs(snap.u.values - rebuilt.values)[region]))


def bound_monitors(run: Sequence[Snapshot], epsilon: float, beta: float,
                   threshold: float = MONITOR_THRESHOLD) -> MonitorReport:
    """sup |w|_inf, sup <t>^{-beta} |w|_H1 and sup <t>^{1/2} |u|_inf, each over epsilon"""
    if epsilon == 0 or not run:
        return MonitorReport(epsilon=epsilon, beta=beta, threshold=threshold, w_inf_ratio=0.0,
                             w_h1_ratio=0.0, decay_ratio=0.0, short_time_ratio=0.0, passed=True)
    bracket = np.array([np.sqrt(1.0 + s.t ** 2) for s in run])
    w_inf = max(s.norms.norm_w_inf for s in run) / epsilon
    w_h1 = float(np.max(bracket ** -beta * np.array([s.norms.norm_w_h1 for s in run]))) / epsilon
    decay = float(np.max(np.sqrt(bracket) * np.array([s.norms.norm_u_inf for s in run]))) / epsilon
    short = short_time_ratio(run, epsilon)
    passed = max(w_inf, w_h1, decay) <= threshold
    return MonitorReport(epsilon=epsilon, beta=beta, threshold=threshold, w_inf_ratio=w_inf,
                         w_h1_ratio=w_h1, decay_ratio=decay, short_time_ratio=short, passed=passed)


def nonlinear_term(app: VApplication, w: ComplexField) -> ComplexField:
    """V^-1 (|V w|^2 V w) on the profile grid"""
    image = app.apply_V(w)
    return app.apply_Vinv(image.copy_with(np.abs(image.values) ** 2 * image.values))


def _spot_indices(first: int, last: int, spots: int) -> List[int]:
    """Up to `spots` distinct indices spread evenly over [first, last]"""
    if last < first:
        return []
    return sorted(set(np.linspace(first, last, spots).round().astype(int).tolist()))


def ode_consistency(run: Sequence[Snapshot], plan: DistortedTransformPlan, lam: float,
                    spots: int = 5) -> Dict[float, float]:
    """
    Relative L2 mismatch between the three-point time derivative of w and
    -i lam t^-1 V^-1 (|V w|^2 V w) at interior snapshots.
    """
    late = _late(run)
    mismatches = {}
    for k in _spot_indices(1, len(late) - 2, spots):
        before, here, after = late[k - 1], late[k], late[k + 1]
        h_minus, h_plus = here.t - before.t, after.t - here.t
        w_minus, w_here, w_plus = (to_profile(s.w).values for s in (before, here, after))
        derivative = (-h_plus / (h_minus * (h_minus + h_plus)) * w_minus
                      + (h_plus - h_minus) / (h_minus * h_plus) * w_here
                      + h_minus / (h_plus * (h_minus + h_plus)) * w_plus)
        app = VApplication(here.t, VMode.FAST, plan)
        predicted = -1j * lam / here.t * nonlinear_term(app, here.w).values
        scale = np.linalg.norm(predicted)
        mismatch = np.linalg.norm(derivative - predicted) / scale if scale else float(np.linalg.norm(derivative))
        mismatches[float(here.t)] = float(mismatch)
        logger.debug(f"ODE mismatch at t={here.t:.3f}: {mismatch:.3e}")
    return mismatches


def nonlinear_estimate_monitor(run: Sequence[Snapshot], plan: DistortedTransformPlan,
                               spots: int = 5, limit: float = NONLINEAR_ESTIMATE_LIMIT) -> Dict[float, float]:
    """
    Ratio of |V^-1(|Vw|^2 Vw)|_{H1dot} to
    t^{-1/4} |w|_H1^3 + (|w|_inf + t^{-1/4} |w|_H1)^2 |w|_H1 at spot times.
    """
    late = _late(run)
    ratios = {}
    for k in _spot_indices(0, len(late) - 1, spots):
        snap = late[k]
        app = VApplication(snap.t, VMode.FAST, plan)
        measured = norm(nonlinear_term(app, snap.w), NormKind.H1DOT)
        h1, sup = snap.norms.norm_w_h1, snap.norms.norm_w_inf
        decay = snap.t ** -0.25
        bound = decay * h1 ** 3 + (sup + decay * h1) ** 2 * h1
        if not np.isfinite(bound):
            raise InvariantViolation(f"nonlinear estimate bound is not finite at t={snap.t}")
        ratio = measured / bound if bound else 0.0
        if ratio > limit:
            raise InvariantViolation(f"nonlinear estimate ratio {ratio:.2f} exceeds {limit} at t={snap.t:.3f}")
        ratios[float(snap.t)] = float(ratio)
    return ratios


def profile_stability(run: Sequence[Snapshot], plan: DistortedTransformPlan, lam: float,
                      first: float, second: float) -> float:
    """|W_{T1} - W_{T2}|_inf over the residual region"""
    by_time = {s.t: s for s in _late(run)}
    missing = [t for t in (first, second) if t not in by_time]
    if missing:
        raise InsufficientRun(f"no snapshot at T = {missing}")
    S = SMatrixField.from_plan(plan)
    w_first = _scattering_profile(S, by_time[first], lam)
    w_second = _scattering_profile(S, by_time[second], lam)
    return float(np.max(np.abs(w_first.values - w_second.values)[residual_region(S.grid)]))
