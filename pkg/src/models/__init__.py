"""
Domain types: parameters, topology, outcomes, simulation records and scenarios
"""

from src.models.errors import (
    V2XError,
    InvalidRegimeError,
    QuadratureError,
    NoRouteError,
    LoopDetectedError,
    UnknownSchemeError,
    InvalidDimensionsError,
    ConfigError
)
from src.models.params import SystemParams, Hop, Route, DeliveryEstimate
from src.models.topology import Node, Edge, Topology, RouteSet
from src.models.outcomes import (
    CoefficientSet,
    ScenarioDecomposition,
    NormalizationContext,
    OptimizationOutcome,
    ConcavityReport,
    RoutingResult
)
from src.models.simulation import (
    Branch,
    HopOutcome,
    SnapshotResult,
    SimConfig,
    EmpiricalEstimate,
    BroadcastTable
)
from src.models.scenario import GridSpec, Scenario, SweepSpec, TRAFFIC_REGIMES

__all__ = [
    'V2XError',
    'InvalidRegimeError',
    'QuadratureError',
    'NoRouteError',
    'LoopDetectedError',
    'UnknownSchemeError',
    'InvalidDimensionsError',
    'ConfigError',
    'SystemParams',
    'Hop',
    'Route',
    'DeliveryEstimate',
    'Node',
    'Edge',
    'Topology',
    'RouteSet',
    'CoefficientSet',
    'ScenarioDecomposition',
    'NormalizationContext',
    'OptimizationOutcome',
    'ConcavityReport',
    'RoutingResult',
    'Branch',
    'HopOutcome',
    'SnapshotResult',
    'SimConfig',
    'EmpiricalEstimate',
    'BroadcastTable',
    'GridSpec',
    'Scenario',
    'SweepSpec',
    'TRAFFIC_REGIMES'
]
