"""
Command line for analysis, optimization, simulation, comparison and sweeps
"""

from src.cli.commands import run_command
from src.cli.scenarios import build_grid_scenario, load_scenario

__all__ = ['run_command', 'build_grid_scenario', 'load_scenario']
