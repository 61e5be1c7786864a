from enum import Enum
from typing import Dict, List, Optional, Tuple
import logging

from pydantic import BaseModel, Field, validator, root_validator

logger = logging.getLogger(__name__)

SAMPLING_MODES = ("coupled", "faithful")
BROADCAST_SCHEMES = ("TD", "FD", "CD", "SD")


class Branch(str, Enum):
    COURIER_FORWARD = "CourierForward"
    DISCOVERY_SUCCESS = "DiscoverySuccess"
    DISCOVERY_FAILURE = "DiscoveryFailure"
    BACKHAUL_FORWARD = "BackhaulForward"


class HopOutcome(BaseModel):
    """What happened to the data on one hop of one snapshot."""

    branch: Branch
    latency: float = Field(..., ge=0)
    discovery_time: float = Field(..., ge=0, description="Candidate or RSU wait; 0 when the courier forwards")
    hop_rate: float

    class Config:
        allow_mutation = False


class SnapshotResult(BaseModel):
    """One end-to-end delivery realization."""

    e2e_latency: float
    e2e_rate: float
    per_hop: List[HopOutcome] = Field(..., min_items=1)

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def validate_totals(cls, values):
        hops = values["per_hop"]
        if abs(values["e2e_latency"] - sum(h.latency for h in hops)) > 1e-9 * max(1.0, values["e2e_latency"]):
            raise ValueError("e2e_latency must equal the sum of hop latencies")
        if abs(values["e2e_rate"] - min(h.hop_rate for h in hops)) > 1e-12:
            raise ValueError("e2e_rate must equal the weakest hop rate")
        return values


class SimConfig(BaseModel):
    """Monte Carlo run settings."""

    n_snapshots: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    backhaul_enabled: bool = False
    scheme: Optional[str] = None
    beams: int = Field(1, ge=1)
    mode: str = "coupled"
    workers: int = Field(1, ge=1)
    backhaul_rate: Optional[float] = Field(None, gt=0, description="Defaults to 4 x r_v2i")

    class Config:
        allow_mutation = False

    @validator("mode")
    def validate_mode(cls, v):
        if v not in SAMPLING_MODES:
            raise ValueError(f"mode must be one of {SAMPLING_MODES}")
        return v

    @validator("scheme")
    def validate_scheme(cls, v):
        if v is not None and v not in BROADCAST_SCHEMES:
            raise ValueError(f"scheme must be one of {BROADCAST_SCHEMES}")
        return v


class EmpiricalEstimate(BaseModel):
    """Sample means and standard errors of a simulated route."""

    n_snapshots: int
    mean_latency: float
    se_latency: float
    mean_rate: float
    se_rate: float
    p_fwd: float
    p_succ: float
    p_fail: float
    p_backhaul: float = 0.0
    per_hop_mean_latency: List[float]
    per_hop_mean_rate: List[float]
    branch_counts: Dict[str, int]

    class Config:
        allow_mutation = False


class BroadcastTable(BaseModel):
    """Trial time per (scheme, simultaneous beams)."""

    entries: Dict[str, Dict[int, float]]

    class Config:
        allow_mutation = False

    @validator("entries")
    def validate_entries(cls, v):
        for scheme, by_beams in v.items():
            if scheme not in BROADCAST_SCHEMES:
                raise ValueError(f"unknown broadcast scheme '{scheme}'")
            for beams, delta_t in by_beams.items():
                if beams < 1 or delta_t <= 0:
                    raise ValueError(f"{scheme}@{beams}: beams must be >= 1 and delta_t > 0")
        if any(beams != 1 for beams in v.get("TD", {})):
            raise ValueError("TD is a single-beam scan; only M = 1 may be listed")
        return v

    @classmethod
    def default(cls, max_beams: int = 8) -> "BroadcastTable":
        beams = range(1, max_beams + 1)
        return cls(entries={
            "TD": {1: 0.1},
            "SD": {m: 0.1 * (1 + 0.05 * m) for m in beams},
            "FD": {m: 0.1 * (1 + 0.1 * m) for m in beams},
            "CD": {m: 0.1 * (1 + 0.1 * m) for m in beams},
        })

    def pairs(self) -> List[Tuple[str, int]]:
        return [(scheme, beams) for scheme in BROADCAST_SCHEMES
                for beams in sorted(self.entries.get(scheme, {}))]
