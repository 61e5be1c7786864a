import pytest

from src.cli.scenarios import scenario_routes
from src.models.errors import NoRouteError
from src.models.topology import Edge, Node, Topology
from src.routing import paths


@pytest.fixture
def detour_topology():
    # S(0,0) -> D(4,0) only via U(0,2) and V(4,2); S is a local minimum
    nodes = [Node(id=0, x=0, y=0), Node(id=1, x=0, y=2), Node(id=2, x=4, y=2), Node(id=3, x=4, y=0)]
    pairs = [(0, 1), (1, 2), (2, 3)]
    edges = [Edge(source=a, target=b, arrival_rate=0.1) for a, b in pairs]
    edges += [Edge(source=b, target=a, arrival_rate=0.1) for a, b in pairs]
    return Topology(nodes=nodes, edges=edges)


def test_grid_enumeration(default_scenario):
    routes = scenario_routes(default_scenario)
    assert len(routes) == 12
    nodes = [tuple(r.nodes) for r in routes.routes]
    assert nodes == sorted(nodes)
    assert nodes[0] == (0, 1, 2, 5, 4, 3, 6, 7, 8)
    assert (0, 1, 2, 5, 8) in nodes
    assert sorted(r.k for r in routes.routes) == [4] * 6 + [6] * 4 + [8] * 2
    for route in routes.routes:
        assert route.source == 0 and route.destination == 8
        assert len(set(route.nodes)) == len(route.nodes)


def test_enumeration_hop_cutoff(default_scenario):
    routes = scenario_routes(default_scenario, max_hops=4)
    assert len(routes) == 6
    assert all(r.k == 4 for r in routes.routes)


def test_build_route_degrees_and_rates(default_scenario):
    topology = default_scenario.topology
    graph = topology.to_graph()
    route = paths.build_route(graph, [0, 1, 2, 5, 8])
    assert [h.rsu_id for h in route.hops] == [0, 1, 2, 5]
    assert [h.deg for h in route.hops] == [2, 1, 2, 1]
    assert route.hops[0].arrival_rate == graph[0][1]["arrival_rate"]
    assert route.hops[2].arrival_rate == graph[2][5]["arrival_rate"]


def test_centre_node_degree(default_scenario):
    route = paths.build_route(default_scenario.topology.to_graph(), [0, 1, 4, 5, 8])
    assert route.hops[1].deg == 3


def test_spr_picks_lexicographic_shortest(default_scenario):
    route = paths.spr_route(default_scenario.topology, 0, 8)
    assert route.nodes == [0, 1, 2, 5, 8]


def test_gpsr_greedy_on_grid(default_scenario):
    assert paths.gpsr_walk(default_scenario.topology, 0, 8) == [0, 1, 4, 5, 8]
    assert paths.gpsr_route(default_scenario.topology, 0, 8).nodes == [0, 1, 4, 5, 8]


def test_gpsr_perimeter_recovery(detour_topology):
    assert paths.gpsr_walk(detour_topology, 0, 3) == [0, 1, 2, 3]
    route = paths.gpsr_route(detour_topology, 0, 3)
    assert route.k == 3


def test_drop_cycles():
    assert paths._drop_cycles([0, 1, 2, 1, 3]) == [0, 1, 3]
    assert paths._drop_cycles([0, 1, 2, 3]) == [0, 1, 2, 3]
    assert paths._drop_cycles([0, 1, 0, 2]) == [0, 2]


def test_unreachable_destination():
    nodes = [Node(id=0, x=0, y=0), Node(id=1, x=1, y=0)]
    topology = Topology(nodes=nodes, edges=[Edge(source=0, target=1, arrival_rate=0.1)])
    with pytest.raises(NoRouteError):
        paths.enumerate_routes(topology, 1, 0)
    with pytest.raises(NoRouteError):
        paths.spr_route(topology, 1, 0)
    with pytest.raises(NoRouteError):
        paths.gpsr_walk(topology, 1, 0)


def test_endpoint_checks(line_topology):
    with pytest.raises(ValueError, match="differ"):
        paths.enumerate_routes(line_topology, 0, 0)
    with pytest.raises(ValueError, match="not part"):
        paths.spr_route(line_topology, 0, 99)


def test_single_street(line_topology):
    routes = paths.enumerate_routes(line_topology, 0, 1)
    assert len(routes) == 1
    hop = routes.routes[0].hops[0]
    assert hop.arrival_rate == 0.1
    assert hop.deg == 1
