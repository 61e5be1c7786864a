"""
Route construction on the RSU graph: full enumeration of loop-free routes and
the two baseline selectors, shortest path (SPR) and greedy perimeter stateless
routing (GPSR) over RSU coordinates.
"""
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import math

import networkx as nx

from src.models.errors import LoopDetectedError, NoRouteError
from src.models.params import Hop, Route
from src.models.topology import RouteSet, Topology

logger = logging.getLogger(__name__)


def _check_endpoints(graph: nx.DiGraph, source: int, destination: int) -> None:
    if source == destination:
        raise ValueError("source and destination must differ")
    for node in (source, destination):
        if node not in graph:
            raise ValueError(f"node {node} is not part of the topology")


def build_route(graph: nx.DiGraph, path: Sequence[int]) -> Route:
    """
    Turn a node path into a Route.

    Hop h is the street from path[h] to path[h+1]; its arrival rate is the rate
    on that directed street and its Deg counts the exits of path[h+1] other
    than the U-turn.
    """
    hops = []
    for here, there in zip(path, path[1:]):
        deg = max(1, graph.out_degree(there) - 1)
        hops.append(Hop(arrival_rate=graph[here][there]["arrival_rate"], deg=deg, rsu_id=here))
    return Route(hops=hops, source=path[0], destination=path[-1])


def enumerate_routes(topology: Topology, source: int, destination: int,
                     max_hops: Optional[int] = None) -> RouteSet:
    """All simple paths from source to destination, ordered lexicographically by node ids."""
    graph = topology.to_graph()
    _check_endpoints(graph, source, destination)
    paths = sorted(tuple(p) for p in nx.all_simple_paths(graph, source, destination, cutoff=max_hops))
    if not paths:
        raise NoRouteError(f"no route from {source} to {destination}"
                           + (f" within {max_hops} hops" if max_hops else ""))
    logger.info(f"Enumerated {len(paths)} loop-free routes from {source} to {destination}")
    return RouteSet(routes=[build_route(graph, p) for p in paths])


def spr_route(topology: Topology, source: int, destination: int) -> Route:
    """Minimum hop-count route; the lexicographically smallest among equals."""
    graph = topology.to_graph()
    _check_endpoints(graph, source, destination)
    try:
        path = min(tuple(p) for p in nx.all_shortest_paths(graph, source, destination))
    except nx.NetworkXNoPath as exc:
        raise NoRouteError(f"no route from {source} to {destination}") from exc
    return build_route(graph, path)


def _angle(origin: Tuple[float, float], target: Tuple[float, float]) -> float:
    return math.atan2(target[1] - origin[1], target[0] - origin[0])


def _right_hand_next(graph: nx.DiGraph, pos: Dict[int, Tuple[float, float]], node: int,
                     reference: float) -> int:
    """First neighbour counterclockwise from the reference direction about ``node``."""
    best, best_turn = None, None
    for neighbour in sorted(graph.successors(node)):
        turn = (_angle(pos[node], pos[neighbour]) - reference) % (2 * math.pi)
        if turn <= 1e-12:
            turn = 2 * math.pi
        if best_turn is None or turn < best_turn:
            best, best_turn = neighbour, turn
    return best


def _drop_cycles(walk: List[int]) -> List[int]:
    path: List[int] = []
    seen: Dict[int, int] = {}
    for node in walk:
        if node in seen:
            del path[seen[node] + 1:]
            seen = {n: i for i, n in enumerate(path)}
        else:
            seen[node] = len(path)
            path.append(node)
    return path


def gpsr_walk(topology: Topology, source: int, destination: int) -> List[int]:
    """
    Node sequence visited by greedy forwarding with right-hand perimeter recovery.

    Greedy mode moves to the neighbour closest to the destination. At a local
    minimum the walk switches to perimeter mode and follows the right-hand rule
    until it reaches a node closer than where perimeter mode began.
    """
    graph = topology.to_graph()
    _check_endpoints(graph, source, destination)
    if not nx.has_path(graph, source, destination):
        raise NoRouteError(f"no route from {source} to {destination}")
    pos = {node: data["pos"] for node, data in graph.nodes(data=True)}

    def distance(node: int) -> float:
        return math.dist(pos[node], pos[destination])

    walk = [source]
    current, previous = source, None
    perimeter_from: Optional[float] = None
    traversed = set()
    max_steps = 2 * graph.number_of_edges() + graph.number_of_nodes()
    while current != destination:
        if len(walk) > max_steps:
            raise LoopDetectedError(f"GPSR did not reach {destination} within {max_steps} steps")
        neighbours = sorted(graph.successors(current))
        if not neighbours:
            raise NoRouteError(f"node {current} has no outgoing street")
        if perimeter_from is not None and distance(current) < perimeter_from:
            perimeter_from = None
        if perimeter_from is None:
            closest = min(neighbours, key=lambda n: (distance(n), n))
            if distance(closest) < distance(current):
                previous, current = current, closest
                walk.append(current)
                continue
            perimeter_from = distance(current)
            traversed = set()
            nxt = _right_hand_next(graph, pos, current, _angle(pos[current], pos[destination]))
            logger.debug(f"GPSR local minimum at {current}, entering perimeter mode")
        else:
            nxt = _right_hand_next(graph, pos, current, _angle(pos[current], pos[previous]))
        edge = (current, nxt)
        if edge in traversed:
            raise LoopDetectedError(f"perimeter traversal revisited street {current}->{nxt}")
        traversed.add(edge)
        previous, current = current, nxt
        walk.append(current)
    return walk


def gpsr_route(topology: Topology, source: int, destination: int) -> Route:
    """GPSR route with any revisited stretch cut out, so the result is loop-free."""
    walk = gpsr_walk(topology, source, destination)
    path = _drop_cycles(walk)
    if len(path) != len(walk):
        logger.info(f"GPSR walk {walk} shortened to loop-free route {path}")
    return build_route(topology.to_graph(), path)
