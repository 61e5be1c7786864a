"""
Command dispatch for ``python main.py <command>``.

Every command prints one JSON summary record on stdout and optionally writes a
CSV artifact with ``--out``. Failures print ``error: <message>`` on stderr and
return exit status 1.
"""
from typing import Any, Callable, Dict, List, Optional, Sequence
import argparse
import json
import logging
import os
import sys

from pydantic import ValidationError

from src.analytics import closed_form, model_core, optimizer
from src.cli.scenarios import load_scenario, scenario_routes
from src.cli.sweeps import SIMULATION_COLUMNS, default_grid, gain_percent, run_sweep
from src.models.errors import V2XError
from src.models.outcomes import NormalizationContext, RoutingResult
from src.models.params import Route, SystemParams
from src.models.scenario import SWEEP_VARIABLES, Scenario, SweepSpec
from src.models.simulation import SAMPLING_MODES, SimConfig
from src.models.topology import RouteSet
from src.routing.algorithms import distributed_routing, global_routing
from src.routing.paths import gpsr_route, spr_route
from src.simulation.broadcast import params_for_scheme, validate_table
from src.simulation.simulator import simulate_route, simulate_with_backhaul
from src.utils.config import get_settings, setup_logging
from src.utils.data_utils import save_summary, to_json, write_csv

logger = logging.getLogger(__name__)

COMMANDS = ("analyze", "optimize-global", "optimize-distributed", "simulate", "compare", "sweep")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--scenario", help="Scenario JSON file; default 3x3 grid when omitted")
    shared.add_argument("--alpha", type=float, help="Weight of the rate term; scenario value when omitted")
    shared.add_argument("--t", type=float, help="Discovery duration in seconds")
    shared.add_argument("--snapshots", type=int, help="Monte Carlo snapshots")
    shared.add_argument("--seed", type=int, help="Simulation seed; scenario value when omitted")
    shared.add_argument("--backhaul", action="store_true", help="Enable backhaul forwarding (full mesh if none configured)")
    shared.add_argument("--scheme", choices=["TD", "FD", "CD", "SD"], help="Broadcast scheme setting the trial time")
    shared.add_argument("--beams", type=int, default=1, help="Simultaneous beams M")
    shared.add_argument("--out", help="CSV artifact path")
    shared.add_argument("--summary", help="Also write the JSON summary to this path")
    shared.add_argument("--max-hops", type=int, help="Longest enumerated route")
    shared.add_argument("--rate-estimator", choices=optimizer.RATE_ESTIMATORS, default="min_of_means")
    shared.add_argument("--mode", choices=SAMPLING_MODES, help="Simulator sampling mode")
    shared.add_argument("--workers", type=int, help="Worker threads")

    parser = argparse.ArgumentParser(prog="v2x-delivery", description="Multihop V2X delivery model and simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[shared], help="Expected latency and rate of every route at t")
    sub.add_parser("optimize-global", parents=[shared], help="Best route with one shared discovery duration")
    dist = sub.add_parser("optimize-distributed", parents=[shared], help="Best route with per-hop durations")
    dist.add_argument("--all-routes", action="store_true", help="Write per-hop durations of every route")
    sub.add_parser("simulate", parents=[shared], help="Monte Carlo against the analytic model")
    sub.add_parser("compare", parents=[shared], help="Proposed routing against SPR and GPSR")
    sweep = sub.add_parser("sweep", parents=[shared], help="CSV over a parameter grid")
    sweep.add_argument("--variable", choices=SWEEP_VARIABLES, required=True)
    sweep.add_argument("--grid", type=_float_list, help="Comma-separated values")
    return parser


class CommandContext:
    """Scenario, parameters and run settings resolved from the command line."""

    def __init__(self, args: argparse.Namespace):
        self.logger = logging.getLogger(__name__)
        self.args = args
        self.settings = get_settings()
        scenario = load_scenario(args.scenario)
        if args.backhaul and not scenario.topology.backhaul_links:
            topology = scenario.topology.with_backhaul(scenario.topology.full_backhaul_mesh())
            scenario = scenario.copy(update={"topology": topology})
        params = scenario.params
        if args.scheme:
            validate_table(scenario.broadcast)
            params = params_for_scheme(params, args.scheme, args.beams, scenario.broadcast)
            scenario = scenario.copy(update={"params": params})
        self.scenario: Scenario = scenario
        self.params: SystemParams = params
        self.alpha = args.alpha if args.alpha is not None else params.alpha
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        self.estimator = args.rate_estimator
        self.workers = args.workers or self.settings.workers

    def routes(self) -> RouteSet:
        return scenario_routes(self.scenario, self.args.max_hops)

    def sim_config(self, snapshots: Optional[int] = None) -> SimConfig:
        base = self.scenario.simulation
        update = {
            "n_snapshots": snapshots or self.args.snapshots or self.settings.snapshots,
            "workers": self.workers,
            "backhaul_enabled": bool(self.args.backhaul),
        }
        if self.args.seed is not None:
            update["seed"] = self.args.seed
        if self.args.mode:
            update["mode"] = self.args.mode
        return SimConfig(**{**base.dict(), **update})

    def duration(self, default: float) -> float:
        t = self.args.t if self.args.t is not None else default
        if not 0.0 <= t <= self.params.T:
            raise ValueError(f"--t must lie in [0, {self.params.T}], got {t}")
        return t


def _route_summary(index: int, route: Route) -> Dict[str, Any]:
    return {"route_index": index, "nodes": route.nodes, "hops": route.k}


def _relative_error(empirical: float, analytic: float) -> Optional[float]:
    return None if analytic == 0 else (empirical - analytic) / abs(analytic)


def cmd_analyze(ctx: CommandContext) -> Dict[str, Any]:
    t = ctx.duration(ctx.params.T / 2)
    routes = ctx.routes().routes
    records = []
    for index, route in enumerate(routes):
        estimate = model_core.estimate_delivery(route, t, ctx.params)
        parts = closed_form.scenario_decomposition(route, t, ctx.params)
        estimate = estimate.copy(update={
            "e2e_rate_closed": closed_form.e2e_rate_closed(route, t, ctx.params),
            "scenario_probabilities": {
                "all_success": parts.p_all_success,
                "all_failure": parts.p_all_failure,
                "mixture": parts.p_mixture,
            },
        })
        record = {**_route_summary(index, route), **estimate.dict()}
        record["scenario_rates"] = {
            "all_success": parts.c_all_success,
            "all_failure": parts.c_all_failure,
            "mixture": parts.c_mixture,
            "mixture_families": parts.c_mixture_families,
        }
        record["regime_warnings"] = model_core.regime_warnings(route, ctx.params)
        records.append(record)
    if ctx.args.out:
        write_csv(
            [{"route_index": r["route_index"], "nodes": "-".join(map(str, r["nodes"])),
              "e2e_latency": r["e2e_latency"], "e2e_rate": r["e2e_rate"], "e2e_rate_closed": r["e2e_rate_closed"]}
             for r in records],
            ctx.args.out,
            ["route_index", "nodes", "e2e_latency", "e2e_rate", "e2e_rate_closed"],
        )
    return {"command": "analyze", "t": t, "routes": records}


def cmd_optimize_global(ctx: CommandContext) -> Dict[str, Any]:
    routes = ctx.routes()
    norm = optimizer.build_normalization(routes, ctx.params, estimator=ctx.estimator)
    result = global_routing(routes, ctx.params, ctx.alpha, norm, ctx.estimator, ctx.workers)
    concavity = optimizer.verify_concavity(result.route, ctx.params, ctx.alpha, estimator=ctx.estimator)
    kkt = optimizer.kkt_stationarity_check(result.t_star, result.route, ctx.params, ctx.alpha, norm, ctx.estimator)
    if ctx.args.out:
        write_csv([o.dict(exclude={"t_hat"}) for o in result.per_route], ctx.args.out,
                  ["route_index", "t_star", "objective", "e2e_latency", "e2e_rate", "norm_latency", "norm_rate"])
    return {
        "command": "optimize-global",
        "alpha": ctx.alpha,
        "rate_estimator": ctx.estimator,
        "routes_compared": len(routes),
        **_route_summary(result.route_index, result.route),
        "outcome": result.outcome.dict(exclude={"t_hat"}),
        "kkt_stationary": kkt,
        "concavity_fraction": concavity.fraction,
    }


def _context_summary(result: RoutingResult, routes: RouteSet) -> Dict[str, Any]:
    summary = {}
    for context, outcomes in result.hop_contexts.items():
        best = max(outcomes, key=lambda o: o.objective)
        summary[context] = {**_route_summary(best.route_index, routes.routes[best.route_index]),
                            "t_hat": best.t_hat, "objective": best.objective,
                            "e2e_latency": best.e2e_latency, "e2e_rate": best.e2e_rate}
    return summary


def cmd_optimize_distributed(ctx: CommandContext) -> Dict[str, Any]:
    routes = ctx.routes()
    # hop-wise vectors are scored with the weakest mean-substituted hop rate
    norm = optimizer.build_normalization(routes, ctx.params)
    dist = distributed_routing(routes, ctx.params, ctx.alpha, norm, ctx.workers)
    glob = global_routing(routes, ctx.params, ctx.alpha, norm, "min_of_means", ctx.workers)
    if ctx.args.out:
        chosen = dist.per_route if ctx.args.all_routes else [dist.outcome]
        rows = [
            {"route_index": outcome.route_index, "hop": h,
             "rsu_id": routes.routes[outcome.route_index].hops[h].rsu_id, "t_hat": t_hat}
            for outcome in chosen for h, t_hat in enumerate(outcome.t_hat)
        ]
        write_csv(rows, ctx.args.out, ["route_index", "hop", "rsu_id", "t_hat"])
    return {
        "command": "optimize-distributed",
        "alpha": ctx.alpha,
        "routes_compared": len(routes),
        **_route_summary(dist.route_index, dist.route),
        "outcome": dist.outcome.dict(exclude={"t_star"}),
        "hop_contexts": _context_summary(dist, routes),
        "global": {
            "route_index": glob.route_index,
            "t_star": glob.t_star,
            "objective": glob.objective,
            "norm_latency": glob.outcome.norm_latency,
            "norm_rate": glob.outcome.norm_rate,
        },
        "gain_percent": gain_percent(dist.objective, glob.objective),
    }


def cmd_simulate(ctx: CommandContext) -> Dict[str, Any]:
    routes = ctx.routes()
    norm = optimizer.build_normalization(routes, ctx.params, estimator=ctx.estimator)
    best = global_routing(routes, ctx.params, ctx.alpha, norm, ctx.estimator, ctx.workers)
    route = best.route
    t = ctx.duration(best.t_star)
    config = ctx.sim_config()
    empirical = simulate_route(route, t, ctx.params, config)
    analytic_latency = float(model_core.expected_e2e_latency(route, t, ctx.params))
    analytic_rate = float(model_core.e2e_rate_min_of_means(route, t, ctx.params))
    hops = []
    for h, hop in enumerate(route.hops):
        mean_substituted = float(model_core.expected_hop_rate(hop, t, ctx.params))
        hops.append({
            "hop": h, "rsu_id": hop.rsu_id,
            "analytic_latency": float(model_core.expected_hop_latency(hop, t, ctx.params)),
            "empirical_latency": empirical.per_hop_mean_latency[h],
            "analytic_rate": mean_substituted,
            "empirical_rate": empirical.per_hop_mean_rate[h],
            "jensen_gap": empirical.per_hop_mean_rate[h] - mean_substituted,
        })
    summary = {
        "command": "simulate",
        "t": t,
        "seed": config.seed,
        "mode": config.mode,
        **_route_summary(best.route_index, route),
        "empirical": empirical.dict(),
        "analytic": {"e2e_latency": analytic_latency, "e2e_rate": analytic_rate},
        "relative_error": {
            "e2e_latency": _relative_error(empirical.mean_latency, analytic_latency),
            "e2e_rate": _relative_error(empirical.mean_rate, analytic_rate),
        },
        "per_hop": hops,
    }
    row = {"t": t, **{key: getattr(empirical, key) for key in SIMULATION_COLUMNS}}
    columns = ["t"] + SIMULATION_COLUMNS
    if ctx.args.backhaul:
        linked = simulate_with_backhaul(route, t, ctx.params, config, ctx.scenario.topology.backhaul_links)
        summary["backhaul"] = linked.dict()
        row.update({"mean_latency_backhaul": linked.mean_latency, "se_latency_backhaul": linked.se_latency})
        columns += ["mean_latency_backhaul", "se_latency_backhaul"]
    if ctx.args.out:
        write_csv([row], ctx.args.out, columns)
    return summary


def cmd_compare(ctx: CommandContext) -> Dict[str, Any]:
    routes = ctx.routes()
    scenario = ctx.scenario
    baselines = {
        "spr": spr_route(scenario.topology, scenario.source, scenario.destination),
        "gpsr": gpsr_route(scenario.topology, scenario.source, scenario.destination),
    }
    norm: NormalizationContext = optimizer.build_normalization(
        list(routes.routes) + list(baselines.values()), ctx.params, estimator=ctx.estimator)
    proposed = global_routing(routes, ctx.params, ctx.alpha, norm, ctx.estimator, ctx.workers)
    selections = {"proposed": proposed.route}
    selections.update(baselines)
    config = ctx.sim_config() if ctx.args.snapshots else None
    rows = []
    for name, route in selections.items():
        outcome = optimizer.solve_global(route, ctx.params, ctx.alpha, norm, estimator=ctx.estimator)
        row = {
            "selector": name, "nodes": route.nodes, "hops": route.k, "t_star": outcome.t_star,
            "objective": outcome.objective, "e2e_latency": outcome.e2e_latency, "e2e_rate": outcome.e2e_rate,
        }
        if config is not None:
            empirical = simulate_route(route, outcome.t_star, ctx.params, config)
            row.update({"empirical_latency": empirical.mean_latency, "se_latency": empirical.se_latency})
        rows.append(row)
    if ctx.args.out:
        columns = ["selector", "nodes", "hops", "t_star", "objective", "e2e_latency", "e2e_rate"]
        if config is not None:
            columns += ["empirical_latency", "se_latency"]
        write_csv([{**r, "nodes": "-".join(map(str, r["nodes"]))} for r in rows], ctx.args.out, columns)
    return {"command": "compare", "alpha": ctx.alpha, "selectors": rows}


def cmd_sweep(ctx: CommandContext) -> Dict[str, Any]:
    variable = ctx.args.variable
    grid = ctx.args.grid or default_grid(variable, ctx.scenario)
    out = ctx.args.out or os.path.join(ctx.settings.output_dir, f"sweep_{variable}.csv")
    spec = SweepSpec(variable=variable, grid=grid, outputs=out)
    sim = ctx.sim_config() if ctx.args.snapshots else None
    rows = run_sweep(spec, ctx.scenario, ctx.alpha, ctx.estimator, ctx.args.max_hops, sim,
                     bool(ctx.args.backhaul), ctx.workers)
    return {"command": "sweep", "variable": variable, "alpha": ctx.alpha, "rows": len(rows), "output": out}


HANDLERS: Dict[str, Callable[[CommandContext], Dict[str, Any]]] = {
    "analyze": cmd_analyze,
    "optimize-global": cmd_optimize_global,
    "optimize-distributed": cmd_optimize_distributed,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv``, run the command and print its summary.

    Returns:
        0 on success, 1 on a handled failure, 2 on bad arguments
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    setup_logging()
    logger.info(f"Running {args.command}")
    try:
        summary = HANDLERS[args.command](CommandContext(args))
        if args.summary:
            save_summary(summary, args.summary)
    except (V2XError, ValidationError, ValueError, OSError, json.JSONDecodeError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(to_json(summary))
    logger.info(f"Finished {args.command}")
    return 0
