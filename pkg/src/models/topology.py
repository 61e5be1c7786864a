from typing import List, Set, Tuple
import math

import networkx as nx
from pydantic import BaseModel, Field, validator, root_validator

from src.models.params import Route


class Node(BaseModel):
    id: int
    x: float = Field(..., description="meters")
    y: float = Field(..., description="meters")

    class Config:
        allow_mutation = False

    @validator("x", "y")
    def validate_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("coordinates must be finite")
        return v


class Edge(BaseModel):
    """Directed street segment with the arrival rate of vehicles driving along it."""

    source: int
    target: int
    arrival_rate: float = Field(..., gt=0)

    class Config:
        allow_mutation = False


class Topology(BaseModel):
    """RSU graph: one node per RSU, one directed edge per street direction."""

    nodes: List[Node] = Field(..., min_items=2)
    edges: List[Edge] = Field(..., min_items=1)
    backhaul_links: List[Tuple[int, int]] = Field(default_factory=list)

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def validate_graph(cls, values):
        ids = [node.id for node in values["nodes"]]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        known = set(ids)
        for edge in values["edges"]:
            if edge.source not in known or edge.target not in known:
                raise ValueError(f"edge {edge.source}->{edge.target} references an unknown node")
        for a, b in values.get("backhaul_links", []):
            if a not in known or b not in known:
                raise ValueError(f"backhaul link {a}-{b} references an unknown node")
        graph = nx.DiGraph()
        graph.add_nodes_from(known)
        graph.add_edges_from((e.source, e.target) for e in values["edges"])
        if not nx.is_weakly_connected(graph):
            raise ValueError("topology graph is not connected")
        return values

    def to_graph(self) -> nx.DiGraph:
        """Build the networkx view used by route enumeration and the baselines."""
        graph = nx.DiGraph()
        for node in self.nodes:
            graph.add_node(node.id, pos=(node.x, node.y))
        for edge in self.edges:
            graph.add_edge(edge.source, edge.target, arrival_rate=edge.arrival_rate)
        return graph

    def position(self, node_id: int) -> Tuple[float, float]:
        for node in self.nodes:
            if node.id == node_id:
                return node.x, node.y
        raise KeyError(node_id)

    def backhaul_pairs(self) -> Set[Tuple[int, int]]:
        """Backhaul links as an undirected pair set."""
        pairs = set()
        for a, b in self.backhaul_links:
            pairs.add((a, b))
            pairs.add((b, a))
        return pairs

    def with_backhaul(self, links: List[Tuple[int, int]]) -> "Topology":
        return self.copy(update={"backhaul_links": list(links)})

    def full_backhaul_mesh(self) -> List[Tuple[int, int]]:
        """Every street-adjacent RSU pair, each listed once."""
        links = {tuple(sorted((e.source, e.target))) for e in self.edges}
        return sorted(links)


class RouteSet(BaseModel):
    """The candidate set of routes between one source and one destination."""

    routes: List[Route] = Field(..., min_items=1)

    class Config:
        allow_mutation = False

    @validator("routes")
    def validate_endpoints(cls, v):
        endpoints = {(route.source, route.destination) for route in v}
        if len(endpoints) != 1:
            raise ValueError(f"routes do not share source and destination: {sorted(endpoints)}")
        return v

    def __len__(self) -> int:
        return len(self.routes)
