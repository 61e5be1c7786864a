from typing import Any, Dict, List, Optional, Tuple
import json

from pydantic import BaseModel, Field, validator, root_validator

from src.models.params import SystemParams
from src.models.simulation import BroadcastTable, SimConfig
from src.models.topology import Topology

# Named arrival-rate intervals in vehicles/s
TRAFFIC_REGIMES: Dict[str, Tuple[float, float]] = {
    "off_peak": (0.05, 0.15),
    "in_between": (0.1, 0.2),
    "rush_hour": (0.2, 0.3),
    "table": (0.05, 0.3),
}

SWEEP_VARIABLES = ("t", "alpha", "lambda_scale", "scheme_beams", "traffic")


class GridSpec(BaseModel):
    """Road grid the topology was generated from."""

    rows: int
    cols: int
    block_m: float = Field(250.0, gt=0, description="Block edge length in meters")

    class Config:
        allow_mutation = False


class Scenario(BaseModel):
    """Everything a command needs: the RSU graph, the constants and the endpoints."""

    topology: Topology
    params: SystemParams = Field(default_factory=SystemParams)
    source: int
    destination: int
    arrival_interval: Tuple[float, float] = TRAFFIC_REGIMES["table"]
    seed: int = Field(0, ge=0)
    route_filter: Optional[int] = Field(None, ge=1, description="Maximum hop count of enumerated routes")
    grid: Optional[GridSpec] = None
    broadcast: BroadcastTable = Field(default_factory=BroadcastTable.default)
    simulation: SimConfig = Field(default_factory=SimConfig)

    class Config:
        allow_mutation = False

    @validator("arrival_interval")
    def validate_interval(cls, v):
        low, high = v
        if not 0 < low <= high:
            raise ValueError(f"arrival interval must satisfy 0 < min <= max, got {v}")
        return v

    @root_validator(skip_on_failure=True)
    def validate_endpoints(cls, values):
        source, destination = values["source"], values["destination"]
        if source == destination:
            raise ValueError("source and destination must differ")
        known = {node.id for node in values["topology"].nodes}
        for node in (source, destination):
            if node not in known:
                raise ValueError(f"endpoint {node} is not a topology node")
        return values

    def to_config(self) -> Dict[str, Any]:
        """JSON-ready dict that ``Scenario.parse_obj`` turns back into an equal scenario."""
        return json.loads(self.json())


class SweepSpec(BaseModel):
    """One sweep: the varied quantity, its values and where the CSV goes."""

    variable: str
    grid: List[float] = Field(..., min_items=1)
    outputs: Optional[str] = None

    class Config:
        allow_mutation = False

    @validator("variable")
    def validate_variable(cls, v):
        if v not in SWEEP_VARIABLES:
            raise ValueError(f"variable must be one of {SWEEP_VARIABLES}")
        return v

    @validator("grid")
    def validate_sorted(cls, v):
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("sweep grid must be sorted")
        return v
