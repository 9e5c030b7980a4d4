"""
Periodic Grid and Sampled Fields

Uniform symmetric periodic grid on [-L, L) with x = 0 on a node, the dual
frequency grid in FFT order, and complex fields sampled on either. Norms,
reflection, spectral derivatives and band-limited resampling live here.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple, Union

import numpy as np
from scipy.signal import czt

from core.exceptions import BoundaryMass, DomainError, GridMismatch
from models.simulation_models import NormKind, SpaceTag

logger = logging.getLogger(__name__)

BOUNDARY_TOLERANCE = 1e-8
EDGE_LAYER_FRACTION = 0.1

# Fourth-order one-sided first-derivative stencil
_ONE_SIDED = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
# One-sided third derivative, exact through quartics
_ONE_SIDED_THIRD = np.array([-5.0, 18.0, -24.0, 14.0, -3.0]) / 2.0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid x_k = -L + k dx, k = 0..N-1"""
    half_length: float
    points: int

    def __post_init__(self):
        if not self.half_length > 0:
            raise DomainError(f"half_length must be > 0, got {self.half_length}")
        if self.points < 8 or self.points % 2:
            raise DomainError(f"points must be even and >= 8, got {self.points}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.points

    @property
    def dxi(self) -> float:
        return np.pi / self.half_length

    @property
    def origin_index(self) -> int:
        return self.points // 2

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_length + self.dx * np.arange(self.points)

    @cached_property
    def xi(self) -> np.ndarray:
        """Dual frequencies pi*m/L in FFT order"""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.dx)

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer m of each dual frequency, FFT order"""
        return np.rint(np.fft.fftfreq(self.points) * self.points).astype(np.int64)

    def dual(self) -> "GridSpec":
        """Profile grid whose nodes are the sorted dual frequencies"""
        return GridSpec(np.pi * self.points / (2.0 * self.half_length), self.points)


@dataclass
class ComplexField:
    """Complex samples of a function on a grid, in position or frequency space"""
    grid: GridSpec
    values: np.ndarray
    space_tag: SpaceTag = SpaceTag.POSITION

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.points,):
            raise GridMismatch(
                f"expected {self.grid.points} samples, got shape {self.values.shape}"
            )

    def copy_with(self, values: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, values, self.space_tag)

    @property
    def is_position(self) -> bool:
        return self.space_tag == SpaceTag.POSITION


def position_field(grid: GridSpec, values) -> ComplexField:
    return ComplexField(grid, values, SpaceTag.POSITION)


def frequency_field(grid: GridSpec, values) -> ComplexField:
    return ComplexField(grid, values, SpaceTag.FREQUENCY)


def require_same_grid(f: ComplexField, grid: GridSpec) -> None:
    if f.grid != grid:
        raise GridMismatch(f"field grid {f.grid} does not match {grid}")


def _require_position(f: ComplexField, operation: str) -> None:
    if not f.is_position:
        raise DomainError(f"{operation} requires a position field")


def reflect(f: ComplexField) -> ComplexField:
    """f(x) -> f(-x); the node -L is its own mirror by periodic wrap"""
    return f.copy_with(np.roll(f.values[::-1], 1))


def spectral_derivative(f: ComplexField) -> ComplexField:
    """Derivative by the standard FFT of the grid (Nyquist mode dropped)"""
    _require_position(f, "spectral_derivative")
    multiplier = 1j * f.grid.xi
    multiplier[f.grid.points // 2] = 0.0
    return f.copy_with(np.fft.ifft(multiplier * np.fft.fft(f.values)))


def norm(f: ComplexField, which: Union[NormKind, str] = NormKind.L2) -> float:
    """Continuum-normalized norms of a sampled field"""
    which = NormKind(which)
    if not np.all(np.isfinite(f.values)):
        raise DomainError("field holds non-finite samples")

    weight = f.grid.dx if f.is_position else f.grid.dxi
    if which == NormKind.L2:
        return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * weight))
    if which == NormKind.LINF:
        return float(np.max(np.abs(f.values))) if f.values.size else 0.0

    _require_position(f, f"{which.value} norm")
    l2_sq = np.sum(np.abs(f.values) ** 2) * weight
    h1dot_sq = np.sum(np.abs(spectral_derivative(f).values) ** 2) * weight
    if which == NormKind.H1DOT:
        return float(np.sqrt(h1dot_sq))
    if which == NormKind.H1:
        return float(np.sqrt(l2_sq + h1dot_sq))
    weighted_sq = np.sum(np.abs(f.grid.x * f.values) ** 2) * weight
    return float(np.sqrt(l2_sq + h1dot_sq + weighted_sq))


def inner(f: ComplexField, g: ComplexField) -> complex:
    """<f, g> = sum conj(f) g times the cell size, on matching grids and spaces"""
    require_same_grid(g, f.grid)
    if f.space_tag != g.space_tag:
        raise GridMismatch(f"inner product of {f.space_tag.value} and {g.space_tag.value} fields")
    weight = f.grid.dx if f.is_position else f.grid.dxi
    return complex(np.vdot(f.values, g.values) * weight)


def _centered(f: ComplexField) -> np.ndarray:
    """Samples ordered so the origin (x = 0 or xi = 0) sits at index N/2"""
    return f.values if f.is_position else np.fft.fftshift(f.values)


def mass_integral(f: ComplexField) -> float:
    """
    Integral of |f|^2 for a field that may carry a kink at the origin.

    The trapezoid sum is split at the origin node and corrected with the
    endpoint terms h^2/12 [g'] - h^4/720 [g'''] of g = |f|^2, the jumps taken
    from one-sided stencils. For fields smooth through the origin both jumps
    vanish to stencil accuracy and the plain sum is returned.
    """
    if not np.all(np.isfinite(f.values)):
        raise DomainError("field holds non-finite samples")
    h = f.grid.dx if f.is_position else f.grid.dxi
    density = np.abs(_centered(f)) ** 2
    k = f.grid.origin_index
    right = density[k:k + 5]
    left = density[k - 4:k + 1][::-1]
    first_jump = (_ONE_SIDED @ right + _ONE_SIDED @ left) / h
    third_jump = (_ONE_SIDED_THIRD @ right + _ONE_SIDED_THIRD @ left) / h ** 3
    total = np.sum(density) * h + h ** 2 / 12.0 * first_jump - h ** 4 / 720.0 * third_jump
    return float(total)


def value_at_zero(f: ComplexField) -> complex:
    _require_position(f, "value_at_zero")
    return complex(f.values[f.grid.origin_index])


def one_sided_derivatives(f: ComplexField) -> Tuple[complex, complex]:
    """Fourth-order one-sided derivatives (f'(0+), f'(0-)) at the origin node"""
    _require_position(f, "one_sided_derivatives")
    k = f.grid.origin_index
    right = f.values[k:k + 5]
    left = f.values[k - 4:k + 1][::-1]
    h = f.grid.dx
    return complex(_ONE_SIDED @ right / h), complex(-(_ONE_SIDED @ left) / h)


def check_boundary(f: ComplexField, tolerance: float = BOUNDARY_TOLERANCE) -> None:
    """Raise BoundaryMass unless the box-edge samples are negligible"""
    sup = np.max(np.abs(f.values))
    if sup == 0.0:
        return
    edge = max(abs(f.values[0]), abs(f.values[1]), abs(f.values[-1]))
    if edge > tolerance * sup:
        raise BoundaryMass(
            f"edge sample {edge:.3e} exceeds {tolerance:.1e} of sup norm {sup:.3e} "
            f"on grid L={f.grid.half_length}, N={f.grid.points}"
        )


def edge_mass_fraction(f: ComplexField) -> float:
    """Share of sum |f|^2 held by the outer tenth of the box, |x| >= 0.9 L"""
    _require_position(f, "edge_mass_fraction")
    density = np.abs(f.values) ** 2
    total = np.sum(density)
    if total == 0.0:
        return 0.0
    layer = np.abs(f.grid.x) >= (1.0 - EDGE_LAYER_FRACTION) * f.grid.half_length
    return float(np.sum(density[layer]) / total)


def check_edge_mass(f: ComplexField, tolerance: float) -> None:
    fraction = edge_mass_fraction(f)
    if fraction > tolerance:
        raise BoundaryMass(
            f"edge-layer mass fraction {fraction:.3e} exceeds {tolerance:.1e} "
            f"on grid L={f.grid.half_length}, N={f.grid.points}"
        )


def trig_interpolate(f: ComplexField, start: float, step: float, count: int) -> np.ndarray:
    """
    Evaluate the trigonometric interpolant of f at start + j*step, j < count.

    The sum over modes is a chirp z-transform, so uniform targets of any
    spacing cost O((N + count) log(N + count)). Targets outside [-L, L] get 0.
    """
    grid = f.grid
    n_pts, half = grid.points, grid.half_length
    coefficients = np.fft.fftshift(np.fft.fft(f.values))
    nyquist = coefficients[0] / 2.0
    coefficients[0] = nyquist

    modes = np.arange(n_pts) - n_pts // 2
    weighted = coefficients * np.exp(1j * np.pi * modes * (start + half) / half)
    ratio = np.exp(1j * np.pi * step / half)
    summed = czt(weighted, m=count, w=ratio, a=1.0)

    j = np.arange(count)
    targets = start + step * j
    values = np.exp(-1j * np.pi * (n_pts // 2) * j * step / half) * summed
    values += nyquist * np.exp(1j * np.pi * (n_pts // 2) * (targets + half) / half)
    values /= n_pts
    values[(targets < -half) | (targets > half)] = 0.0
    return values


def resample(f: ComplexField, target: GridSpec) -> ComplexField:
    """Band-limited interpolation of a decayed position field onto target"""
    _require_position(f, "resample")
    check_boundary(f)
    if target == f.grid:
        return ComplexField(target, f.values.copy(), SpaceTag.POSITION)
    values = trig_interpolate(f, -target.half_length, target.dx, target.points)
    return ComplexField(target, values, SpaceTag.POSITION)


def to_profile(psi: ComplexField) -> ComplexField:
    """Frequency field as a position field on the dual (profile) grid"""
    if psi.is_position:
        raise DomainError("to_profile expects a frequency field")
    return ComplexField(psi.grid.dual(), np.fft.fftshift(psi.values), SpaceTag.POSITION)


def from_profile(f: ComplexField, grid: GridSpec) -> ComplexField:
    """Inverse of to_profile for a field living on grid.dual()"""
    require_same_grid(f, grid.dual())
    return ComplexField(grid, np.fft.ifftshift(f.values), SpaceTag.FREQUENCY)
