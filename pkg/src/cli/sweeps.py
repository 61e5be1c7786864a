"""
Parameter sweeps behind the ``sweep`` command. Each function returns the CSV
rows; the column order of every sweep is fixed in SWEEP_COLUMNS.
"""
from typing import Any, Dict, List, Optional, Sequence
import logging

import numpy as np

from src.analytics import model_core, optimizer
from src.cli.scenarios import build_grid_scenario, scale_arrival_rates, scenario_routes
from src.models.errors import ConfigError
from src.models.scenario import TRAFFIC_REGIMES, Scenario, SweepSpec
from src.models.simulation import BROADCAST_SCHEMES, SimConfig
from src.routing.algorithms import distributed_routing, global_routing
from src.simulation.broadcast import params_for_scheme
from src.simulation.simulator import simulate_route, simulate_with_backhaul
from src.utils.data_utils import write_csv

logger = logging.getLogger(__name__)

SIMULATION_COLUMNS = ["mean_latency", "se_latency", "mean_rate", "se_rate", "p_fwd", "p_succ", "p_fail"]
SCHEME_FIELDS = ["delta_t", "route_index", "t_star", "objective"]
BACKHAUL_COLUMNS = ["mean_latency_backhaul", "se_latency_backhaul", "mean_rate_backhaul", "se_rate_backhaul"]

SWEEP_COLUMNS: Dict[str, List[str]] = {
    "t": ["t", "route_index", "e2e_latency", "e2e_rate", "norm_latency", "norm_rate", "objective"],
    "alpha": ["alpha", "global_route", "t_star", "global_objective", "distributed_route",
              "distributed_objective", "gain_percent"],
    "lambda_scale": ["lambda_scale", "route_index", "t_star", "objective", "e2e_latency", "e2e_rate"],
    "scheme_beams": ["beams"] + [f"{scheme}_{field}" for scheme in BROADCAST_SCHEMES for field in SCHEME_FIELDS],
    "traffic": ["regime_index", "regime", "seed", "lambda_min", "lambda_max", "route_index", "t_star",
                "mean_t_hat", "objective"],
}

DEFAULT_GRIDS = {
    "alpha": [0.0, 0.25, 0.5, 0.75, 1.0],
    "lambda_scale": [0.5, 0.75, 1.0, 1.5, 2.0],
    "scheme_beams": [1, 2, 4, 8],
    "traffic": [float(i) for i in range(len(TRAFFIC_REGIMES))],
}


def default_grid(variable: str, scenario: Scenario) -> List[float]:
    if variable == "t":
        return [float(x) for x in np.linspace(0.0, scenario.params.T, 201)]
    return list(DEFAULT_GRIDS[variable])


def gain_percent(distributed: float, global_: float) -> Optional[float]:
    """Relative gain of the distributed objective over the global one."""
    if global_ == 0:
        return None
    return 100.0 * (distributed - global_) / abs(global_)


def sweep_t(scenario: Scenario, grid: Sequence[float], alpha: float, estimator: str = "min_of_means",
            max_hops: Optional[int] = None, sim: Optional[SimConfig] = None, backhaul: bool = False,
            workers: int = 1) -> List[Dict[str, Any]]:
    """
    Objective of the globally best route over t, with optional simulation columns.
    """
    params = scenario.params
    routes = scenario_routes(scenario, max_hops)
    norm = optimizer.build_normalization(routes, params, estimator=estimator)
    best = global_routing(routes, params, alpha, norm, estimator, workers)
    route = best.route
    t = np.asarray(grid, dtype=float)
    latency = np.atleast_1d(model_core.expected_e2e_latency(route, t, params))
    rate = np.atleast_1d(optimizer.e2e_rate(route, t, params, estimator))
    norm_latency = np.atleast_1d(norm.normalize_latency(latency))
    norm_rate = np.atleast_1d(norm.normalize_rate(rate))
    objective = np.atleast_1d(optimizer.weighted_sum(alpha, norm_rate, norm_latency))

    rows = []
    for i, value in enumerate(t):
        row = {
            "t": float(value), "route_index": best.route_index,
            "e2e_latency": float(latency[i]), "e2e_rate": float(rate[i]),
            "norm_latency": float(norm_latency[i]), "norm_rate": float(norm_rate[i]),
            "objective": float(objective[i]),
        }
        if sim is not None:
            plain = simulate_route(route, float(value), params, sim)
            row.update({key: getattr(plain, key) for key in SIMULATION_COLUMNS})
            if backhaul:
                linked = simulate_with_backhaul(route, float(value), params, sim, scenario.topology.backhaul_links)
                row.update({
                    "mean_latency_backhaul": linked.mean_latency, "se_latency_backhaul": linked.se_latency,
                    "mean_rate_backhaul": linked.mean_rate, "se_rate_backhaul": linked.se_rate,
                })
        rows.append(row)
    return rows


def sweep_alpha(scenario: Scenario, grid: Sequence[float], estimator: str = "min_of_means",
                max_hops: Optional[int] = None, workers: int = 1) -> List[Dict[str, Any]]:
    """Global against distributed routing over the weight alpha."""
    params = scenario.params
    routes = scenario_routes(scenario, max_hops)
    norm = optimizer.build_normalization(routes, params, estimator=estimator)
    rows = []
    for alpha in grid:
        glob = global_routing(routes, params, alpha, norm, estimator, workers)
        dist = distributed_routing(routes, params, alpha, norm, workers)
        rows.append({
            "alpha": alpha,
            "global_route": glob.route_index, "t_star": glob.t_star, "global_objective": glob.objective,
            "distributed_route": dist.route_index, "distributed_objective": dist.objective,
            "gain_percent": gain_percent(dist.objective, glob.objective),
        })
    return rows


def sweep_lambda_scale(scenario: Scenario, grid: Sequence[float], alpha: float, estimator: str = "min_of_means",
                       max_hops: Optional[int] = None, workers: int = 1) -> List[Dict[str, Any]]:
    """Optimal duration as every street's arrival rate is scaled."""
    rows = []
    for factor in grid:
        scaled = scenario.copy(update={"topology": scale_arrival_rates(scenario.topology, factor)})
        routes = scenario_routes(scaled, max_hops)
        result = global_routing(routes, scaled.params, alpha, estimator=estimator, workers=workers)
        rows.append({
            "lambda_scale": factor, "route_index": result.route_index, "t_star": result.t_star,
            "objective": result.objective, "e2e_latency": result.outcome.e2e_latency,
            "e2e_rate": result.outcome.e2e_rate,
        })
    return rows


def sweep_scheme_beams(scenario: Scenario, grid: Sequence[float], alpha: float, estimator: str = "min_of_means",
                       max_hops: Optional[int] = None, workers: int = 1) -> List[Dict[str, Any]]:
    """
    One row per beam count M, with the optimum of every scheme side by side.

    Each (scheme, M) pair is normalised on its own, since the trial time
    reshapes the series. Schemes without an M entry in the broadcast table
    (TD beyond M = 1) leave their columns empty.
    """
    routes = scenario_routes(scenario, max_hops)
    rows = []
    for value in grid:
        beams = int(value)
        if beams != value or beams < 1:
            raise ConfigError(f"beam counts must be positive integers, got {value}")
        row: Dict[str, Any] = {"beams": beams}
        for scheme in BROADCAST_SCHEMES:
            if beams not in scenario.broadcast.entries.get(scheme, {}):
                row.update({f"{scheme}_{field}": None for field in SCHEME_FIELDS})
                continue
            params = params_for_scheme(scenario.params, scheme, beams, scenario.broadcast)
            result = global_routing(routes, params, alpha, estimator=estimator, workers=workers)
            row.update({
                f"{scheme}_delta_t": params.delta_t, f"{scheme}_route_index": result.route_index,
                f"{scheme}_t_star": result.t_star, f"{scheme}_objective": result.objective,
            })
        rows.append(row)
    return rows


def sweep_traffic(scenario: Scenario, grid: Sequence[float], alpha: float, estimator: str = "min_of_means",
                  max_hops: Optional[int] = None, workers: int = 1) -> List[Dict[str, Any]]:
    """
    Global t* and mean distributed hop duration per traffic regime.

    The grid lists regime indices into TRAFFIC_REGIMES; each regime redraws the
    arrival rates of the scenario's grid with the scenario's seed.
    """
    if scenario.grid is None:
        raise ConfigError("the traffic sweep needs a grid scenario to redraw arrival rates")
    regimes = list(TRAFFIC_REGIMES)
    rows = []
    for value in grid:
        index = int(value)
        if index != value or not 0 <= index < len(regimes):
            raise ConfigError(f"traffic regime index must be one of 0..{len(regimes) - 1}, got {value}")
        regime = regimes[index]
        redrawn = build_grid_scenario(
            scenario.grid.rows, scenario.grid.cols, scenario.grid.block_m, scenario.params,
            scenario.seed, regime, source=scenario.source, destination=scenario.destination,
        )
        routes = scenario_routes(redrawn, max_hops)
        norm = optimizer.build_normalization(routes, redrawn.params, estimator=estimator)
        glob = global_routing(routes, redrawn.params, alpha, norm, estimator, workers)
        dist = distributed_routing(routes, redrawn.params, alpha, norm, workers)
        low, high = TRAFFIC_REGIMES[regime]
        rows.append({
            "regime_index": index, "regime": regime, "seed": scenario.seed, "lambda_min": low, "lambda_max": high,
            "route_index": glob.route_index, "t_star": glob.t_star,
            "mean_t_hat": float(np.mean(dist.t_hat)), "objective": glob.objective,
        })
    return rows


def run_sweep(spec: SweepSpec, scenario: Scenario, alpha: float, estimator: str = "min_of_means",
              max_hops: Optional[int] = None, sim: Optional[SimConfig] = None, backhaul: bool = False,
              workers: int = 1) -> List[Dict[str, Any]]:
    """Dispatch ``spec`` and write its CSV when ``spec.outputs`` is set."""
    logger.info(f"Sweeping {spec.variable} over {len(spec.grid)} values")
    columns = list(SWEEP_COLUMNS[spec.variable])
    if spec.variable == "t":
        rows = sweep_t(scenario, spec.grid, alpha, estimator, max_hops, sim, backhaul, workers)
        if sim is not None:
            columns += SIMULATION_COLUMNS + (BACKHAUL_COLUMNS if backhaul else [])
    elif spec.variable == "alpha":
        rows = sweep_alpha(scenario, spec.grid, estimator, max_hops, workers)
    elif spec.variable == "lambda_scale":
        rows = sweep_lambda_scale(scenario, spec.grid, alpha, estimator, max_hops, workers)
    elif spec.variable == "scheme_beams":
        rows = sweep_scheme_beams(scenario, spec.grid, alpha, estimator, max_hops, workers)
    else:
        rows = sweep_traffic(scenario, spec.grid, alpha, estimator, max_hops, workers)
    if spec.outputs:
        write_csv(rows, spec.outputs, columns)
    return rows
