"""
Pydantic Models for Simulation Configuration and Results
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SpaceTag(str, Enum):
    POSITION = "position"
    FREQUENCY = "frequency"


class NormKind(str, Enum):
    L2 = "L2"
    LINF = "Linf"
    H1DOT = "H1dot"
    H1 = "H1"
    SIGMA = "Sigma"


class VMode(str, Enum):
    FAST = "fast"
    ORACLE = "oracle"
    APPROXIMANT = "approximant"
    COMPOSITION = "composition"


class ProfileFamily(str, Enum):
    GAUSSIAN = "gaussian"
    MODULATED_GAUSSIAN = "modulated_gaussian"
    ODD = "odd"


class SimConfig(BaseModel):
    """Configuration of one evolution run and its analysis"""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    q: float = 1.0
    lam: float = Field(1.0, alias="lambda")
    epsilon: float = 0.1
    profile: ProfileFamily = ProfileFamily.GAUSSIAN
    center: float = 0.0
    width: float = 2.0
    velocity: float = 0.0
    half_length: float = 1024.0
    points: int = 32768
    dt: float = 0.01
    t_max: float = 256.0
    snapshot_exponent: int = 4
    beta: float = 0.1
    seed: int = 0
    output_dir: str = "runs/default"

    @field_validator("q")
    @classmethod
    def _q_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"q must be > 0 (repulsive potential), got {value}")
        return value

    @field_validator("epsilon")
    @classmethod
    def _epsilon_nonnegative(cls, value: float) -> float:
        if value < 0:
            raise ValueError(f"epsilon must be >= 0, got {value}")
        return value

    @field_validator("half_length", "width", "t_max")
    @classmethod
    def _strictly_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"must be > 0, got {value}")
        return value

    @field_validator("points")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value < 8 or value & (value - 1):
            raise ValueError(f"points must be a power of two >= 8, got {value}")
        return value

    @field_validator("dt")
    @classmethod
    def _dt_range(cls, value: float) -> float:
        if not 0 < value <= 0.1:
            raise ValueError(f"dt must lie in (0, 0.1] for splitting accuracy, got {value}")
        return value

    @field_validator("beta")
    @classmethod
    def _beta_range(cls, value: float) -> float:
        if not 0 < value < 0.125:
            raise ValueError(f"beta must lie in (0, 1/8), got {value}")
        return value

    @field_validator("snapshot_exponent")
    @classmethod
    def _exponent_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"snapshot_exponent must be >= 1, got {value}")
        return value


class RateFit(BaseModel):
    """Least-squares fit of log(value) against log(t)"""

    t_lo: float
    t_hi: float
    slope: float
    intercept: float
    max_residual: float
    points: int

    @model_validator(mode="after")
    def _window_ordered(self) -> "RateFit":
        if not self.t_lo < self.t_hi:
            raise ValueError(f"empty window [{self.t_lo}, {self.t_hi}]")
        return self


class NormRecord(BaseModel):
    """Norms monitored at one snapshot"""

    norm_u_inf: float
    norm_u_h1: float
    norm_w_inf: float
    norm_w_h1: float
    w_at_zero_abs: float
    mass: float
    energy: float


class MonitorReport(BaseModel):
    """Bound monitors of a run, each normalized by epsilon"""

    epsilon: float
    beta: float
    threshold: float
    w_inf_ratio: float
    w_h1_ratio: float
    decay_ratio: float
    short_time_ratio: float
    passed: bool


class ProfileSummary(BaseModel):
    """Serializable summary of an extracted scattering profile"""

    extraction_time: float
    half_length: float
    points: int
    beta: float
    config_hash: str = ""
    w_inf: float
    residual_fit: Optional[RateFit] = None
    g_cauchy_fit: Optional[RateFit] = None
    asymptotic_fit: Optional[RateFit] = None
    ode_mismatch: Dict[str, float] = {}
    notes: List[str] = []
