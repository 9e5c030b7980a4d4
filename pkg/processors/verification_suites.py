"""
Verification Suites

Tabulated checks behind the verify-transform and verify-vops commands.
"""

import logging
from typing import Iterable, List, Sequence

import numpy as np
import pandas as pd

from core.distorted_fourier import DistortedTransformPlan
from core.exceptions import DnlsError
from core.field_grid import ComplexField, GridSpec, mass_integral, norm, position_field
from core.scattering_coefficients import ScatteringCoeffs
from core.v_operators import VApplication, approximant_error, h1_growth_check, profile_plan
from models.simulation_models import NormKind, VMode
from processors.rate_fitting import fit_rate
from utils.initial_profiles import random_battery, transform_battery


class TransformSuite:
    """
    Unitarity, round trip, oracle gap, origin null and mapping constants per
    battery function. The fixed battery is extended by random_count seeded
    random profiles.
    """

    def __init__(self, half_length: float = 40.0, points: int = 4096, n_jobs: int = 1,
                 seed: int = 0, random_count: int = 2):
        self.grid = GridSpec(half_length, points)
        self.n_jobs = n_jobs
        self.seed = seed
        self.random_count = random_count
        self.logger = logging.getLogger(__name__)

    def run(self, q_values: Iterable[float], with_oracle: bool = True) -> pd.DataFrame:
        rows = []
        battery = self.battery()
        for q in q_values:
            plan = DistortedTransformPlan(self.grid, ScatteringCoeffs(q), n_jobs=self.n_jobs)
            for name, phi in battery.items():
                try:
                    rows.append(self._check(plan, name, phi, with_oracle))
                except DnlsError as e:
                    self.logger.error(f"Transform check {name} at q={q} failed: {str(e)}")
                    rows.append({"function": name, "q": q, "error": str(e)})
        return pd.DataFrame(rows)

    def battery(self) -> dict:
        battery = dict(transform_battery(self.grid))
        for i, phi in enumerate(random_battery(self.grid, self.random_count, self.seed)):
            battery[f"random_{self.seed}_{i}"] = phi
        return battery

    def _check(self, plan: DistortedTransformPlan, name: str, phi: ComplexField, with_oracle: bool) -> dict:
        psi = plan.forward(phi)
        back = plan.inverse(psi)
        weighted = np.sqrt(np.sum((1 + plan.grid.x ** 2) * np.abs(phi.values) ** 2) * plan.grid.dx)
        row = {
            "function": name,
            "q": plan.coeffs.q,
            "unitarity": abs(np.sqrt(plan.spectral_mass(psi) / mass_integral(phi)) - 1.0),
            "round_trip": float(np.max(np.abs(back.values - phi.values))),
            "origin_null": abs(psi.values[0]) / weighted,
        }
        if with_oracle:
            row["oracle_gap"] = float(np.max(np.abs(plan.forward_oracle(phi).values - psi.values)))
        row.update(plan.mapping_constants(phi))
        return row


class VOperatorSuite:
    """Approximant rate fits and H1 growth ratios of V and V^-1"""

    def __init__(self, q: float = 1.0, profile_half_length: float = 8.0, points: int = 16384):
        self.plan = profile_plan(ScatteringCoeffs(q), profile_half_length, points)
        self.grid = self.plan.grid.dual()
        self.logger = logging.getLogger(__name__)

    def test_functions(self) -> dict:
        y = self.grid.x
        return {
            "gaussian": position_field(self.grid, np.exp(-y ** 2 / 2)),
            "vanishing": position_field(self.grid, y * np.exp(-y ** 2)),
        }

    def approximant_rates(self, times: Sequence[float]) -> pd.DataFrame:
        rows = []
        for name, f in self.test_functions().items():
            for inverse in (False, True):
                errors = [approximant_error(VApplication(t, VMode.FAST, self.plan), f, inverse)
                          for t in times]
                fit = fit_rate(times, errors)
                rows.append({"function": name, "operator": "Vinv" if inverse else "V",
                             "slope": fit.slope, "intercept": fit.intercept,
                             "max_residual": fit.max_residual, "error_at_first": errors[0],
                             "error_at_last": errors[-1]})
        return pd.DataFrame(rows)

    def growth_ratios(self, times: Sequence[float]) -> pd.DataFrame:
        functions = self.test_functions()
        rows: List[dict] = []
        for t in times:
            app = VApplication(t, VMode.FAST, self.plan)
            rows.append({
                "t": t,
                "V_vanishing": h1_growth_check(app, functions["vanishing"]),
                "Vinv_gaussian": h1_growth_check(app, functions["gaussian"], inverse=True),
                "Vinv_gaussian_h1dot": norm(app.apply_Vinv(functions["gaussian"]), NormKind.H1DOT),
            })
        return pd.DataFrame(rows)
