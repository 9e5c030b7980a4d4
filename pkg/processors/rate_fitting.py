"""
Log-Log Rate Fitting
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from core.exceptions import NonPositiveValue, TooFewPoints
from models.simulation_models import RateFit

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 6


def fit_rate(times: Sequence[float], values: Sequence[float],
             window: Optional[Tuple[float, float]] = None) -> RateFit:
    """Ordinary least squares of log(value) against log(t) inside window"""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (float(times.min()), float(times.max())) if times.size else (0.0, 0.0)
    lo, hi = window

    inside = (times >= lo * (1 - 1e-12)) & (times <= hi * (1 + 1e-12))
    t_in, v_in = times[inside], values[inside]
    if t_in.size < MIN_FIT_POINTS:
        raise TooFewPoints(f"{t_in.size} points in [{lo}, {hi}], need {MIN_FIT_POINTS}")
    if np.any(t_in <= 0) or np.any(~(v_in > 0)):
        raise NonPositiveValue(f"log-log fit on [{lo}, {hi}] needs positive times and values")

    log_t, log_v = np.log(t_in), np.log(v_in)
    slope, intercept = np.polyfit(log_t, log_v, 1)
    residual = float(np.max(np.abs(log_v - (slope * log_t + intercept))))
    logger.debug(f"Fitted slope {slope:.4f} on [{lo:g}, {hi:g}] from {t_in.size} points")
    return RateFit(t_lo=lo, t_hi=hi, slope=float(slope), intercept=float(intercept),
                   max_residual=residual, points=int(t_in.size))
