"""
Initial Data Families

Gaussian, modulated Gaussian and odd profiles scaled to a requested
Sigma-norm, plus the function batteries used by the verification suites.
"""

import logging
from typing import Dict, List, Optional

import numpy as np

from core.field_grid import ComplexField, GridSpec, norm, position_field
from models.simulation_models import NormKind, ProfileFamily, SimConfig

logger = logging.getLogger(__name__)


def unit_profile(grid: GridSpec, family: ProfileFamily, center: float = 0.0,
                 width: float = 2.0, velocity: float = 0.0) -> np.ndarray:
    x = grid.x
    family = ProfileFamily(family)
    if family == ProfileFamily.GAUSSIAN:
        return np.exp(-((x - center) / width) ** 2).astype(np.complex128)
    if family == ProfileFamily.MODULATED_GAUSSIAN:
        return np.exp(-((x - center) / width) ** 2 + 1j * velocity * x)
    return (x * np.exp(-(x / width) ** 2)).astype(np.complex128)


def scaled_profile(grid: GridSpec, family: ProfileFamily, epsilon: float, center: float = 0.0,
                   width: float = 2.0, velocity: float = 0.0) -> ComplexField:
    """Profile of the family with |u0|_Sigma = epsilon"""
    shape = position_field(grid, unit_profile(grid, family, center, width, velocity))
    if epsilon == 0:
        return shape.copy_with(np.zeros(grid.points, dtype=np.complex128))
    return shape.copy_with(shape.values * (epsilon / norm(shape, NormKind.SIGMA)))


def initial_data(config: SimConfig, grid: Optional[GridSpec] = None) -> ComplexField:
    grid = grid or GridSpec(config.half_length, config.points)
    return scaled_profile(grid, config.profile, config.epsilon, config.center,
                          config.width, config.velocity)


def transform_battery(grid: GridSpec) -> Dict[str, ComplexField]:
    """Ten fixed test functions covering even, odd, kinked, shifted and oscillating data"""
    x = grid.x
    gauss = np.exp(-x ** 2 / 2)
    functions = {
        "gaussian": gauss,
        "narrow_gaussian": np.exp(-2 * x ** 2),
        "shifted_gaussian": np.exp(-(x - 3) ** 2),
        "odd": x * gauss,
        "modulated": np.exp(-x ** 2 / 2 + 2j * x),
        "kinked": np.exp(-np.abs(x) - x ** 2 / 8),
        "jump_compatible": (1 + np.abs(x)) * gauss,
        "sech": 1 / np.cosh(x) * np.exp(-x ** 2 / 50),
        "two_bumps": np.exp(-(x - 4) ** 2) + 0.5j * np.exp(-(x + 5) ** 2 / 2),
        "even_quadratic": x ** 2 * np.exp(-x ** 2 / 3),
    }
    return {name: position_field(grid, values) for name, values in functions.items()}


def random_battery(grid: GridSpec, count: int, seed: int = 0) -> List[ComplexField]:
    """Seeded sums of three complex Gaussians with random centers, widths and phases"""
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(count):
        values = np.zeros(grid.points, dtype=np.complex128)
        for _ in range(3):
            center = rng.uniform(-3.0, 3.0)
            width = rng.uniform(0.7, 2.0)
            amplitude = rng.normal() + 1j * rng.normal()
            values += amplitude * np.exp(-((grid.x - center) / width) ** 2 + 1j * rng.uniform(-2, 2) * grid.x)
        fields.append(position_field(grid, values))
    return fields
