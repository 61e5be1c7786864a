"""
Main package for the V2X multihop delivery model
"""

from src.models.params import SystemParams, Hop, Route
from src.models.topology import Topology, RouteSet

__version__ = "0.1"

__all__ = [
    'SystemParams',
    'Hop',
    'Route',
    'Topology',
    'RouteSet'
]
