"""
Route enumeration, baseline selectors and the routing algorithms
"""

from src.routing.paths import enumerate_routes, spr_route, gpsr_route, build_route
from src.routing.algorithms import global_routing, distributed_routing

__all__ = [
    'enumerate_routes',
    'spr_route',
    'gpsr_route',
    'build_route',
    'global_routing',
    'distributed_routing'
]
