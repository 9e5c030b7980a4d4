"""Shared grids, plans and synthetic runs"""

from typing import Callable, List, Sequence

import numpy as np
import pytest

from core.distorted_fourier import DistortedTransformPlan
from core.field_grid import GridSpec, frequency_field, position_field
from core.propagator import Snapshot
from core.scattering_coefficients import ScatteringCoeffs
from core.v_operators import profile_plan
from models.simulation_models import NormRecord
from utils.initial_profiles import transform_battery


@pytest.fixture(scope="session")
def grid() -> GridSpec:
    return GridSpec(40.0, 4096)


@pytest.fixture(scope="session")
def coarse_grid() -> GridSpec:
    return GridSpec(40.0, 1024)


@pytest.fixture(scope="session")
def plan(grid) -> DistortedTransformPlan:
    return DistortedTransformPlan(grid, ScatteringCoeffs(1.0))


@pytest.fixture(scope="session")
def coarse_plan(coarse_grid) -> DistortedTransformPlan:
    return DistortedTransformPlan(coarse_grid, ScatteringCoeffs(1.0))


@pytest.fixture(scope="session")
def battery(grid):
    return transform_battery(grid)


@pytest.fixture(scope="session")
def vplan() -> DistortedTransformPlan:
    """Plan whose profile grid is [-8, 8) with 4096 nodes"""
    return profile_plan(ScatteringCoeffs(1.0), 8.0, 4096)


def _blank_record() -> NormRecord:
    return NormRecord(norm_u_inf=0.0, norm_u_h1=0.0, norm_w_inf=0.0, norm_w_h1=0.0,
                      w_at_zero_abs=0.0, mass=0.0, energy=0.0)


@pytest.fixture
def synthetic_run() -> Callable[..., List[Snapshot]]:
    """Snapshots carrying prescribed profile-grid w at the given times"""

    def build(plan: DistortedTransformPlan, times: Sequence[float],
              profile: Callable[[float, np.ndarray], np.ndarray]) -> List[Snapshot]:
        run = []
        y = plan.grid.dual().x
        for t in times:
            w = frequency_field(plan.grid, np.fft.ifftshift(profile(t, y)))
            u = position_field(plan.grid, np.zeros(plan.grid.points))
            run.append(Snapshot(float(t), u, w, _blank_record()))
        return run

    return build
