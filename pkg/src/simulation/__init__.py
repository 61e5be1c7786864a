"""
Monte Carlo simulator and broadcast-scheme trial times
"""

from src.simulation.simulator import simulate_hop, simulate_route, simulate_with_backhaul
from src.simulation.broadcast import delta_t_for_scheme

__all__ = [
    'simulate_hop',
    'simulate_route',
    'simulate_with_backhaul',
    'delta_t_for_scheme'
]
