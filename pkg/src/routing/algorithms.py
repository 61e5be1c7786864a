"""
Route selection by exhaustive comparison of per-route optima.

``global_routing`` solves one shared discovery duration per route;
``distributed_routing`` lets every hop run its own. Both compare routes under
one normalization context and keep the first route among equals.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple
import logging

from src.analytics import optimizer
from src.models.outcomes import NormalizationContext, OptimizationOutcome, RoutingResult
from src.models.params import Route, SystemParams
from src.models.topology import RouteSet

logger = logging.getLogger(__name__)


def _solve_all(routes: List[Route], solve: Callable[[int, Route], Any], workers: int) -> List[Any]:
    if workers > 1 and len(routes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve, range(len(routes)), routes))
    return [solve(index, route) for index, route in enumerate(routes)]


def _pick(routes: List[Route], outcomes: List[OptimizationOutcome]) -> RoutingResult:
    best = 0
    for index, outcome in enumerate(outcomes[1:], start=1):
        if outcome.objective > outcomes[best].objective:
            best = index
    return RoutingResult(
        objective=outcomes[best].objective,
        route_index=best,
        route=routes[best],
        outcome=outcomes[best],
        per_route=outcomes,
    )


def global_routing(route_set: RouteSet, params: SystemParams, alpha: float,
                   norm: Optional[NormalizationContext] = None,
                   estimator: str = "min_of_means", workers: int = 1) -> RoutingResult:
    """
    Best route and shared duration t* over the whole route set.

    Args:
        route_set: Candidate routes, all between the same endpoints
        params: System constants
        alpha: Weight of the rate term
        norm: Shared min-max context; built over ``route_set`` when omitted
        estimator: E2E rate estimator passed to the optimizer
        workers: Threads used for the per-route solves

    Returns:
        RoutingResult with the winning route, its outcome and every route's outcome
    """
    routes = list(route_set.routes)
    norm = norm or optimizer.build_normalization(routes, params, estimator=estimator)

    def solve(index: int, route: Route) -> OptimizationOutcome:
        return optimizer.solve_global(route, params, alpha, norm, route_index=index, estimator=estimator)

    result = _pick(routes, _solve_all(routes, solve, workers))
    logger.info(f"Global routing (alpha={alpha}): route {result.route_index} {result.route.nodes} "
                f"t*={result.t_star:.4f} objective={result.objective:.6f}")
    return result


def distributed_routing(route_set: RouteSet, params: SystemParams, alpha: float,
                        norm: Optional[NormalizationContext] = None,
                        workers: int = 1) -> RoutingResult:
    """
    Best route when every hop runs its own duration; routes compared end to end.

    Each route is first solved hop by hop twice, once with every hop on its own
    scales and once on the shared E2E scales. Both vectors, and the route's
    shared duration t* repeated per hop, seed a coordinate ascent on the E2E
    objective. The refined vectors decide the winner; the two hop-wise
    solutions are kept in ``hop_contexts``.
    """
    routes = list(route_set.routes)
    norm = norm or optimizer.build_normalization(routes, params)

    def solve(index: int, route: Route) -> Tuple[OptimizationOutcome, Dict[str, OptimizationOutcome]]:
        contexts = {
            context: optimizer.solve_distributed(route, params, alpha, norm, route_index=index, context=context)
            for context in optimizer.HOP_CONTEXTS
        }
        shared_t = optimizer.solve_global(route, params, alpha, norm, route_index=index).t_star
        starts = [contexts[c].t_hat for c in optimizer.HOP_CONTEXTS] + [[shared_t] * route.k]
        refined = optimizer.refine_distributed(route, params, alpha, norm, starts, route_index=index)
        return refined, contexts

    solved = _solve_all(routes, solve, workers)
    result = _pick(routes, [refined for refined, _ in solved])
    hop_contexts = {c: [contexts[c] for _, contexts in solved] for c in optimizer.HOP_CONTEXTS}
    result = result.copy(update={"hop_contexts": hop_contexts})
    logger.info(f"Distributed routing (alpha={alpha}): route {result.route_index} {result.route.nodes} "
                f"objective={result.objective:.6f}")
    return result
