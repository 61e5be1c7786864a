"""
Scenario construction and scenario-file parsing.
"""
from typing import Any, Dict, List, Optional, Tuple, Union
import logging

import numpy as np
from pydantic import ValidationError

from src.models.errors import ConfigError, InvalidDimensionsError
from src.models.params import SystemParams
from src.models.scenario import TRAFFIC_REGIMES, GridSpec, Scenario
from src.models.topology import Edge, Node, RouteSet, Topology
from src.routing.paths import enumerate_routes
from src.utils.data_utils import load_json

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_M = 250.0


def grid_node_id(row: int, col: int, cols: int) -> int:
    return row * cols + col


def grid_topology(rows: int, cols: int, block_m: float, seed: int,
                  arrival_interval: Tuple[float, float]) -> Topology:
    """
    Rows x cols RSUs at block spacing, joined by two-way streets.

    Node 0 is the upper-left RSU; ids run row by row. Each directed street gets
    an arrival rate drawn uniformly from ``arrival_interval``, in sorted edge
    order, from a Philox stream keyed by ``seed``.
    """
    if rows < 2 or cols < 2:
        raise InvalidDimensionsError(f"grid needs at least 2 rows and 2 columns, got {rows}x{cols}")
    nodes = [
        Node(id=grid_node_id(r, c, cols), x=c * block_m, y=(rows - 1 - r) * block_m)
        for r in range(rows) for c in range(cols)
    ]
    pairs = []
    for r in range(rows):
        for c in range(cols):
            here = grid_node_id(r, c, cols)
            if c + 1 < cols:
                pairs.append((here, grid_node_id(r, c + 1, cols)))
            if r + 1 < rows:
                pairs.append((here, grid_node_id(r + 1, c, cols)))
    directed = sorted(pairs + [(b, a) for a, b in pairs])
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    low, high = arrival_interval
    rates = rng.uniform(low, high, len(directed)) if high > low else np.full(len(directed), low)
    edges = [Edge(source=a, target=b, arrival_rate=float(rate)) for (a, b), rate in zip(directed, rates)]
    return Topology(nodes=nodes, edges=edges)


def build_grid_scenario(rows: int = 3, cols: int = 3, block_m: float = DEFAULT_BLOCK_M,
                        params: Optional[SystemParams] = None, seed: int = 0,
                        arrival_interval: Union[str, Tuple[float, float]] = "table",
                        **overrides: Any) -> Scenario:
    """
    Grid scenario with the upper-left RSU as source and the lower-right as destination.

    Args:
        rows: RSU rows (at least 2)
        cols: RSU columns (at least 2)
        block_m: Street length between neighbouring RSUs in meters
        params: System constants; defaults when omitted
        seed: Seed of the arrival-rate draw
        arrival_interval: (min, max) in vehicles/s or a traffic regime name
        **overrides: Further Scenario fields

    Returns:
        The validated Scenario
    """
    if isinstance(arrival_interval, str):
        if arrival_interval not in TRAFFIC_REGIMES:
            raise ConfigError(f"unknown traffic regime '{arrival_interval}', expected one of {sorted(TRAFFIC_REGIMES)}")
        arrival_interval = TRAFFIC_REGIMES[arrival_interval]
    topology = grid_topology(rows, cols, block_m, seed, tuple(arrival_interval))
    fields = {
        "topology": topology,
        "params": params or SystemParams(),
        "source": 0,
        "destination": rows * cols - 1,
        "arrival_interval": tuple(arrival_interval),
        "seed": seed,
        "grid": GridSpec(rows=rows, cols=cols, block_m=block_m),
    }
    fields.update(overrides)
    scenario = Scenario(**fields)
    logger.debug(f"Built {rows}x{cols} grid scenario with {len(topology.edges)} directed streets, seed {seed}")
    return scenario


def scale_arrival_rates(topology: Topology, factor: float) -> Topology:
    """Copy of ``topology`` with every street's arrival rate multiplied by ``factor``."""
    if factor <= 0:
        raise ValueError(f"arrival-rate scale must be positive, got {factor}")
    edges = [Edge(source=e.source, target=e.target, arrival_rate=e.arrival_rate * factor) for e in topology.edges]
    return Topology(nodes=topology.nodes, edges=edges, backhaul_links=topology.backhaul_links)


def resolve_backhaul(topology: Topology, spec: Union[str, List[Any], None]) -> Topology:
    """Apply a ``backhaul`` section: "none", "full" or an explicit list of RSU pairs."""
    if spec is None or spec == "none":
        return topology
    if spec == "full":
        return topology.with_backhaul(topology.full_backhaul_mesh())
    if isinstance(spec, list):
        return Topology(nodes=topology.nodes, edges=topology.edges, backhaul_links=[tuple(p) for p in spec])
    raise ConfigError(f"backhaul must be 'none', 'full' or a list of RSU pairs, got {spec!r}")


def scenario_from_config(data: Dict[str, Any]) -> Scenario:
    """
    Build a Scenario from a parsed scenario file.

    The file either carries an explicit ``topology`` or a ``grid`` section
    ({rows, cols, block_m}) that is expanded with the file's seed and arrival
    interval. A ``backhaul`` section is folded into the topology.
    """
    data = dict(data)
    backhaul = data.pop("backhaul", None)
    try:
        if "topology" not in data:
            grid = data.pop("grid", None) or {}
            scenario = build_grid_scenario(
                rows=grid.get("rows", 3),
                cols=grid.get("cols", 3),
                block_m=grid.get("block_m", DEFAULT_BLOCK_M),
                params=SystemParams.parse_obj(data.pop("params", {})),
                seed=data.pop("seed", 0),
                arrival_interval=data.pop("arrival_interval", "table"),
                **data,
            )
        else:
            scenario = Scenario.parse_obj(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"invalid scenario section: {exc}") from exc
    if backhaul is not None:
        scenario = scenario.copy(update={"topology": resolve_backhaul(scenario.topology, backhaul)})
    return scenario


def load_scenario(path: Optional[str] = None) -> Scenario:
    """Scenario from a JSON file, or the default 3x3 grid when no path is given."""
    if path is None:
        return build_grid_scenario()
    return scenario_from_config(load_json(path))


def scenario_routes(scenario: Scenario, max_hops: Optional[int] = None) -> RouteSet:
    """Every loop-free route of the scenario, optionally bounded in length."""
    bound = max_hops if max_hops is not None else scenario.route_filter
    return enumerate_routes(scenario.topology, scenario.source, scenario.destination, bound)
