import numpy as np
import pytest

from src.cli.scenarios import build_grid_scenario
from src.models.params import Hop, Route, SystemParams
from src.models.topology import Edge, Node, Topology


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def hop():
    return Hop(arrival_rate=0.1, deg=3, rsu_id=0)


@pytest.fixture
def route():
    return Route(
        hops=[
            Hop(arrival_rate=0.1, deg=3, rsu_id=0),
            Hop(arrival_rate=0.25, deg=2, rsu_id=1),
            Hop(arrival_rate=0.07, deg=3, rsu_id=2),
        ],
        source=0,
        destination=3,
    )


@pytest.fixture
def default_scenario():
    return build_grid_scenario()


@pytest.fixture
def line_topology():
    nodes = [Node(id=0, x=0.0, y=0.0), Node(id=1, x=250.0, y=0.0)]
    edges = [Edge(source=0, target=1, arrival_rate=0.1), Edge(source=1, target=0, arrival_rate=0.2)]
    return Topology(nodes=nodes, edges=edges)


def random_route(rng: np.random.Generator, k: int) -> Route:
    hops = [
        Hop(arrival_rate=float(rng.uniform(0.05, 0.3)), deg=int(rng.integers(1, 4)), rsu_id=h)
        for h in range(k)
    ]
    return Route(hops=hops, source=0, destination=k)


@pytest.fixture
def random_routes():
    rng = np.random.default_rng(7)
    return [random_route(rng, int(rng.integers(1, 6))) for _ in range(20)]
