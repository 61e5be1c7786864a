from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, validator, root_validator

from src.models.params import Route


class CoefficientSet(BaseModel):
    """Shorthand coefficients of one hop evaluated at one discovery duration."""

    t: float
    alpha_h: float
    beta_h: float
    theta_h: float
    phi_h: float
    zeta_h: float
    iota_h: float
    kappa_h: float
    nu_h: float
    chi_h: float
    z: float

    class Config:
        allow_mutation = False


class ScenarioDecomposition(BaseModel):
    """Joint success/failure/mixture split of a route and the rate in each scenario."""

    p_all_success: float = Field(..., ge=0, le=1)
    p_all_failure: float = Field(..., ge=0, le=1)
    p_mixture: float = Field(..., ge=0, le=1)
    c_all_success: Optional[float] = None
    c_all_failure: Optional[float] = None
    c_mixture: Optional[float] = None
    c_mixture_families: Optional[float] = None

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def validate_total(cls, values):
        total = values["p_all_success"] + values["p_all_failure"] + values["p_mixture"]
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"scenario probabilities sum to {total}, not 1")
        return values


class NormalizationContext(BaseModel):
    """Min-max bounds shared by every weighted sum compared against each other."""

    latency_min: float
    latency_max: float
    rate_min: float
    rate_max: float
    grid: List[float]

    class Config:
        allow_mutation = False

    @validator("grid")
    def validate_grid(cls, v):
        if len(v) < 2 or v[0] != 0.0:
            raise ValueError("grid must start at 0 and hold at least two points")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("grid must be strictly increasing")
        return v

    @root_validator(skip_on_failure=True)
    def validate_bounds(cls, values):
        if values["latency_max"] < values["latency_min"] or values["rate_max"] < values["rate_min"]:
            raise ValueError("normalization bounds are inverted")
        return values

    def normalize_latency(self, latency):
        return _min_max(latency, self.latency_min, self.latency_max)

    def normalize_rate(self, rate):
        return _min_max(rate, self.rate_min, self.rate_max)


def _min_max(value, low: float, high: float):
    value = np.asarray(value, dtype=float)
    span = high - low
    if span <= 0:
        # constant series normalise to 0
        return np.zeros_like(value)
    return np.clip((value - low) / span, 0.0, 1.0)


class OptimizationOutcome(BaseModel):
    """Optimal discovery duration(s) of one route and the objective they reach."""

    objective: float = Field(..., ge=-1, le=1)
    t_star: Optional[float] = None
    t_hat: Optional[List[float]] = None
    route_index: int = 0
    e2e_latency: Optional[float] = None
    e2e_rate: Optional[float] = None
    norm_latency: Optional[float] = None
    norm_rate: Optional[float] = None

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def validate_durations(cls, values):
        if (values.get("t_star") is None) == (values.get("t_hat") is None):
            raise ValueError("exactly one of t_star (global) or t_hat (distributed) is set")
        return values

    @property
    def is_distributed(self) -> bool:
        return self.t_hat is not None


class ConcavityReport(BaseModel):
    """Share of interior grid points per smooth piece where the curvature is non-positive."""

    per_piece: List[float]
    fraction: float
    worst_second_difference: float
    tolerance: float

    class Config:
        allow_mutation = False

    @property
    def holds(self) -> bool:
        return self.fraction >= 1.0


class RoutingResult(BaseModel):
    """Winner of a routing algorithm plus the per-route outcomes it compared."""

    objective: float
    route_index: int
    route: Route
    outcome: OptimizationOutcome
    per_route: List[OptimizationOutcome]
    hop_contexts: Dict[str, List[OptimizationOutcome]] = Field(default_factory=dict)

    class Config:
        allow_mutation = False

    @property
    def t_star(self) -> Optional[float]:
        return self.outcome.t_star

    @property
    def t_hat(self) -> Optional[List[float]]:
        return self.outcome.t_hat
