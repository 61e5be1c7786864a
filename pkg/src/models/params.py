from typing import Dict, List, Optional
import logging

from pydantic import BaseModel, Field, validator, root_validator

logger = logging.getLogger(__name__)


class SystemParams(BaseModel):
    """Global constants shared by every hop of every route."""

    T: float = Field(20.0, gt=0, description="Hop dwell time in seconds")
    delta_t: float = Field(0.1, gt=0, description="Duration of one discovery trial in seconds")
    epsilon: float = Field(1e-3, ge=0, lt=1, description="Decode error probability per message")
    r_v2v: float = Field(2.0, ge=0, description="V2V link rate")
    r_v2i: float = Field(1.5, ge=0, description="V2I link rate")
    r_o: float = Field(1.0, ge=0, description="Rate served to cellular users")
    alpha: float = Field(0.5, ge=0, le=1, description="Weight of the data rate term")

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def validate_trial_time(cls, values):
        if values["delta_t"] > values["T"]:
            raise ValueError(
                f"delta_t ({values['delta_t']}) must not exceed T ({values['T']})"
            )
        return values

    @property
    def trial_success(self) -> float:
        """Probability that one beacon/feedback exchange gets through: (1 - eps)^2."""
        return (1.0 - self.epsilon) ** 2


class Hop(BaseModel):
    """One road segment under an RSU, heading towards the next RSU of the route."""

    arrival_rate: float = Field(..., gt=0, description="Arrival rate of candidates (vehicles/s)")
    deg: int = Field(..., ge=1, description="Exit directions except U-turn")
    rsu_id: int = Field(..., description="RSU that covers this hop")

    class Config:
        allow_mutation = False


class Route(BaseModel):
    """An ordered, loop-free sequence of hops from source to destination."""

    hops: List[Hop] = Field(..., min_items=1)
    source: int
    destination: int

    class Config:
        allow_mutation = False

    @validator("hops")
    def validate_loop_free(cls, v):
        ids = [hop.rsu_id for hop in v]
        if len(set(ids)) != len(ids):
            raise ValueError(f"route revisits an RSU: {ids}")
        return v

    @property
    def k(self) -> int:
        return len(self.hops)

    @property
    def nodes(self) -> List[int]:
        """RSU sequence including the destination."""
        return [hop.rsu_id for hop in self.hops] + [self.destination]

    def next_rsu(self, index: int) -> int:
        """RSU the data is handed to when hop ``index`` completes."""
        return self.nodes[index + 1]


class DeliveryEstimate(BaseModel):
    """Expected end-to-end latency and rate of a route, with per-hop breakdowns."""

    e2e_latency: float
    e2e_rate: float
    per_hop_latency: List[float]
    per_hop_rate: List[float]
    e2e_rate_closed: Optional[float] = None
    scenario_probabilities: Optional[Dict[str, float]] = None

    class Config:
        allow_mutation = False
