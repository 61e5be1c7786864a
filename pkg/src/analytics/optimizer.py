"""
Weighted-sum optimisation of the discovery duration.

The objective is piecewise smooth in t: the trial count floor(t/dt) jumps at
every multiple of dt. Each smooth piece is searched for stationary maxima by
sign changes of a central-difference derivative, refined by bisection and a
short golden-section pass; the piece ends join the candidate set.
"""
from typing import Callable, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np

from src.analytics import closed_form, model_core
from src.models.outcomes import ConcavityReport, NormalizationContext, OptimizationOutcome
from src.models.params import Hop, Route, SystemParams
from src.models.topology import RouteSet

logger = logging.getLogger(__name__)

RATE_ESTIMATORS = ("min_of_means", "closed")
DERIVATIVE_STEP = 1e-4          # fraction of delta_t
SAMPLES_PER_PIECE = 16
BISECTION_TOLERANCE = 1e-10     # fraction of T
LEFT_LIMIT_OFFSET = 1e-6        # fraction of delta_t
KKT_TOLERANCE = 1e-6
GOLDEN_ITERATIONS = 60
COORDINATE_SWEEPS = 20
HOP_CONTEXTS = ("own", "shared")
INV_PHI = (math.sqrt(5) - 1) / 2

Objective = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# grids and series
# ---------------------------------------------------------------------------

def piece_bounds(params: SystemParams) -> List[Tuple[float, float]]:
    """Smooth pieces [j dt, (j+1) dt) of [0, T]; the last one may be shorter."""
    n = model_core.max_trials(params.T, params.delta_t)
    pieces = [(j * params.delta_t, min((j + 1) * params.delta_t, params.T)) for j in range(n)]
    tail_start = n * params.delta_t
    if params.T - tail_start > LEFT_LIMIT_OFFSET * params.delta_t:
        pieces.append((tail_start, params.T))
    return pieces


def breakpoints(params: SystemParams) -> np.ndarray:
    """0, T and every multiple of dt in between."""
    n = model_core.max_trials(params.T, params.delta_t)
    points = np.arange(n + 1) * params.delta_t
    points = points[points < params.T]
    return np.append(points, params.T)


def evaluation_grid(params: SystemParams, refine: int = 3) -> np.ndarray:
    """Breakpoints plus ``refine`` evenly spaced interior points per piece."""
    grid = [breakpoints(params)]
    for a, b in piece_bounds(params):
        grid.append(a + (b - a) * np.arange(1, refine + 1) / (refine + 1))
    return np.unique(np.concatenate(grid))


def e2e_rate(route: Route, t, params: SystemParams, estimator: str = "min_of_means"):
    """E2E rate series under the chosen estimator."""
    if estimator == "min_of_means":
        return model_core.e2e_rate_min_of_means(route, t, params)
    if estimator == "closed":
        t_arr = np.asarray(t, dtype=float)
        values = np.array([closed_form.e2e_rate_closed(route, float(x), params) for x in t_arr.ravel()])
        return model_core._out(values.reshape(t_arr.shape))
    raise ValueError(f"unknown rate estimator '{estimator}', expected one of {RATE_ESTIMATORS}")


def evaluate_durations(route: Route, t_hat: Sequence[float], params: SystemParams) -> Tuple[float, float]:
    """E2E latency (sum) and rate (weakest hop) when each hop runs its own duration."""
    if len(t_hat) != route.k:
        raise ValueError(f"expected {route.k} hop durations, got {len(t_hat)}")
    latency = sum(float(model_core.expected_hop_latency(hop, th, params)) for hop, th in zip(route.hops, t_hat))
    rate = min(float(model_core.expected_hop_rate(hop, th, params)) for hop, th in zip(route.hops, t_hat))
    return latency, rate


# ---------------------------------------------------------------------------
# normalization and objective
# ---------------------------------------------------------------------------

def _routes(routes: Union[RouteSet, Sequence[Route]]) -> List[Route]:
    return list(routes.routes) if isinstance(routes, RouteSet) else list(routes)


def build_normalization(routes: Union[RouteSet, Sequence[Route]], params: SystemParams,
                        refine: int = 3, estimator: str = "min_of_means") -> NormalizationContext:
    """
    Min-max context over every route and every grid point.

    The per-hop envelope of each route is folded in as well, so hop-wise
    duration vectors evaluated end to end stay inside the same bounds.
    """
    routes = _routes(routes)
    if not routes:
        raise ValueError("cannot normalise over an empty route set")
    grid = evaluation_grid(params, refine)
    lat_lo, lat_hi, rate_lo, rate_hi = np.inf, -np.inf, np.inf, -np.inf
    for route in routes:
        latency = np.asarray(model_core.expected_e2e_latency(route, grid, params))
        rate = np.asarray(e2e_rate(route, grid, params, estimator))
        hop_lat = np.array([model_core.expected_hop_latency(hop, grid, params) for hop in route.hops])
        hop_rate = np.array([model_core.expected_hop_rate(hop, grid, params) for hop in route.hops])
        lat_lo = min(lat_lo, latency.min(), hop_lat.min(axis=1).sum())
        lat_hi = max(lat_hi, latency.max(), hop_lat.max(axis=1).sum())
        rate_lo = min(rate_lo, rate.min(), hop_rate.min())
        rate_hi = max(rate_hi, rate.max(), hop_rate.max(axis=1).min())
    context = NormalizationContext(
        latency_min=float(lat_lo), latency_max=float(lat_hi),
        rate_min=float(rate_lo), rate_max=float(rate_hi),
        grid=[float(x) for x in grid],
    )
    logger.debug(f"Normalization over {len(routes)} routes x {grid.size} points: "
                 f"latency [{lat_lo:.4f}, {lat_hi:.4f}], rate [{rate_lo:.4f}, {rate_hi:.4f}]")
    return context


def build_hop_normalization(hop: Hop, params: SystemParams, refine: int = 3) -> NormalizationContext:
    """
    Min-max context of one hop's own latency and rate series.

    Bounds also cover the piece-end left limits and the interior rate maxima,
    so the hop's best duration is never clipped into a tie.
    """
    grid = evaluation_grid(params, refine)
    left_limits = np.array([b for _, b in piece_bounds(params)]) - LEFT_LIMIT_OFFSET * params.delta_t
    peaks = stationary_points(lambda t: np.asarray(model_core.expected_hop_rate(hop, t, params)), params)
    points = np.concatenate([grid, left_limits, peaks])
    latency = np.asarray(model_core.expected_hop_latency(hop, points, params))
    rate = np.asarray(model_core.expected_hop_rate(hop, points, params))
    return NormalizationContext(
        latency_min=float(latency.min()), latency_max=float(latency.max()),
        rate_min=float(rate.min()), rate_max=float(rate.max()),
        grid=[float(x) for x in grid],
    )


def weighted_sum(alpha: float, norm_rate, norm_latency):
    """alpha * normalised rate - (1 - alpha) * normalised latency."""
    return model_core._out(alpha * np.asarray(norm_rate) - (1.0 - alpha) * np.asarray(norm_latency))


def global_objective(route: Route, params: SystemParams, alpha: float, norm: NormalizationContext,
                     estimator: str = "min_of_means") -> Objective:
    def objective(t):
        latency = model_core.expected_e2e_latency(route, t, params)
        rate = e2e_rate(route, t, params, estimator)
        return weighted_sum(alpha, norm.normalize_rate(rate), norm.normalize_latency(latency))
    return objective


def hop_objective(hop: Hop, params: SystemParams, alpha: float, norm: NormalizationContext) -> Objective:
    def objective(t):
        latency = model_core.expected_hop_latency(hop, t, params)
        rate = model_core.expected_hop_rate(hop, t, params)
        return weighted_sum(alpha, norm.normalize_rate(rate), norm.normalize_latency(latency))
    return objective


def raw_objective(route: Route, params: SystemParams, alpha: float,
                  estimator: str = "min_of_means") -> Objective:
    """Unnormalised alpha * C - (1 - alpha) * L."""
    def objective(t):
        latency = np.asarray(model_core.expected_e2e_latency(route, t, params))
        rate = np.asarray(e2e_rate(route, t, params, estimator))
        return alpha * rate - (1.0 - alpha) * latency
    return objective


# ---------------------------------------------------------------------------
# piecewise maximisation
# ---------------------------------------------------------------------------

def _derivative(f: Objective, t: np.ndarray, h: float) -> np.ndarray:
    return (np.asarray(f(t + h)) - np.asarray(f(t - h))) / (2.0 * h)


def golden_section_max(f: Objective, lo: np.ndarray, hi: np.ndarray,
                       iterations: int = GOLDEN_ITERATIONS) -> np.ndarray:
    """Vectorised golden-section search for the maximiser of ``f`` on each [lo, hi]."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    for _ in range(iterations):
        x1 = hi - INV_PHI * (hi - lo)
        x2 = lo + INV_PHI * (hi - lo)
        left = np.asarray(f(x1)) >= np.asarray(f(x2))
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
    return 0.5 * (lo + hi)


def stationary_points(f: Objective, params: SystemParams) -> np.ndarray:
    """
    Interior maxima of every smooth piece.

    A + to - sign change of f' brackets each maximum; bisection narrows the
    bracket and a golden-section pass within a few derivative steps settles
    on the maximiser itself, which also covers kinks of the min over hops.
    """
    h = DERIVATIVE_STEP * params.delta_t
    pieces = np.array(piece_bounds(params))
    a, b = pieces[:, 0:1], pieces[:, 1:2]
    fractions = np.linspace(0.0, 1.0, SAMPLES_PER_PIECE)
    samples = (a + 2 * h) + (b - a - 4 * h) * fractions
    slopes = _derivative(f, samples, h)
    rising = slopes[:, :-1] > 0
    falling = slopes[:, 1:] <= 0
    rows, cols = np.nonzero(rising & falling)
    if rows.size == 0:
        return np.empty(0)
    lo = samples[rows, cols]
    hi = samples[rows, cols + 1]
    tolerance = BISECTION_TOLERANCE * params.T
    for _ in range(200):
        if np.max(hi - lo) < tolerance:
            break
        mid = 0.5 * (lo + hi)
        up = _derivative(f, mid, h) > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    centre = 0.5 * (lo + hi)
    offset = LEFT_LIMIT_OFFSET * params.delta_t
    window_lo = np.maximum(centre - 4 * h, pieces[rows, 0] + offset)
    window_hi = np.minimum(centre + 4 * h, pieces[rows, 1] - offset)
    return golden_section_max(f, window_lo, window_hi)


def candidate_durations(f: Objective, params: SystemParams) -> np.ndarray:
    """0, T, piece ends (attained and left limits) and stationary maxima, ascending."""
    left_limits = np.array([b for _, b in piece_bounds(params)]) - LEFT_LIMIT_OFFSET * params.delta_t
    points = np.concatenate([breakpoints(params), left_limits, stationary_points(f, params)])
    points = np.clip(points, 0.0, params.T)
    return np.unique(points)


def maximize(f: Objective, params: SystemParams) -> Tuple[float, float]:
    """Best candidate duration and its objective; ties go to the smaller duration."""
    candidates = candidate_durations(f, params)
    values = np.asarray(f(candidates))
    best = int(np.argmax(values))
    return float(candidates[best]), float(values[best])


def solve_global(route: Route, params: SystemParams, alpha: float, norm: NormalizationContext,
                 route_index: int = 0, estimator: str = "min_of_means") -> OptimizationOutcome:
    """Single duration shared by every hop that maximises the normalised weighted sum."""
    f = global_objective(route, params, alpha, norm, estimator)
    t_star, value = maximize(f, params)
    latency = float(model_core.expected_e2e_latency(route, t_star, params))
    rate = float(e2e_rate(route, t_star, params, estimator))
    return OptimizationOutcome(
        objective=value,
        t_star=t_star,
        route_index=route_index,
        e2e_latency=latency,
        e2e_rate=rate,
        norm_latency=float(norm.normalize_latency(latency)),
        norm_rate=float(norm.normalize_rate(rate)),
    )


def solve_hop(hop: Hop, params: SystemParams, alpha: float,
              hop_norm: Optional[NormalizationContext] = None) -> Tuple[float, float]:
    """Duration maximising one hop's own normalised weighted sum."""
    hop_norm = hop_norm or build_hop_normalization(hop, params)
    return maximize(hop_objective(hop, params, alpha, hop_norm), params)


def shared_hop_objective(hop: Hop, params: SystemParams, alpha: float,
                         norm: NormalizationContext) -> Objective:
    """
    One hop's weighted sum on the scales of the end-to-end context.

    The hop rate is placed on the E2E rate scale and the hop latency counts as
    its share of the E2E latency span. Neither term is clipped.
    """
    rate_span = (norm.rate_max - norm.rate_min) or 1.0
    latency_span = (norm.latency_max - norm.latency_min) or 1.0

    def objective(t):
        latency = np.asarray(model_core.expected_hop_latency(hop, t, params))
        rate = np.asarray(model_core.expected_hop_rate(hop, t, params))
        return weighted_sum(alpha, (rate - norm.rate_min) / rate_span, latency / latency_span)
    return objective


def vector_objective(route: Route, t_hat: Sequence[float], params: SystemParams, alpha: float,
                     norm: NormalizationContext) -> float:
    """Normalised weighted sum of a per-hop duration vector evaluated end to end."""
    latency, rate = evaluate_durations(route, t_hat, params)
    return float(weighted_sum(alpha, norm.normalize_rate(rate), norm.normalize_latency(latency)))


def _distributed_outcome(route: Route, t_hat: Sequence[float], params: SystemParams, alpha: float,
                         norm: NormalizationContext, route_index: int) -> OptimizationOutcome:
    latency, rate = evaluate_durations(route, t_hat, params)
    norm_latency = float(norm.normalize_latency(latency))
    norm_rate = float(norm.normalize_rate(rate))
    return OptimizationOutcome(
        objective=float(weighted_sum(alpha, norm_rate, norm_latency)),
        t_hat=[float(x) for x in t_hat],
        route_index=route_index,
        e2e_latency=latency,
        e2e_rate=rate,
        norm_latency=norm_latency,
        norm_rate=norm_rate,
    )


def solve_distributed(route: Route, params: SystemParams, alpha: float, norm: NormalizationContext,
                      route_index: int = 0, context: str = "own") -> OptimizationOutcome:
    """
    Per-hop durations, each maximising its hop's weighted sum independently.

    With ``context="own"`` every hop normalises over its own latency and rate
    series; with ``context="shared"`` it scores itself on the scales of ``norm``
    (see ``shared_hop_objective``). The reported objective evaluates the
    resulting vector end to end (summed latency, weakest-hop rate) under ``norm``.
    """
    if context == "own":
        t_hat = [solve_hop(hop, params, alpha)[0] for hop in route.hops]
    elif context == "shared":
        t_hat = [maximize(shared_hop_objective(hop, params, alpha, norm), params)[0] for hop in route.hops]
    else:
        raise ValueError(f"unknown hop context '{context}', expected one of {HOP_CONTEXTS}")
    return _distributed_outcome(route, t_hat, params, alpha, norm, route_index)


def coordinate_ascent(route: Route, params: SystemParams, alpha: float, norm: NormalizationContext,
                      t_hat: Sequence[float], sweeps: int = COORDINATE_SWEEPS) -> List[float]:
    """
    Raise the end-to-end objective of ``t_hat`` one hop at a time.

    Each hop re-solves its duration against the E2E objective with the other
    hops held fixed. A move is kept only if it strictly improves the objective,
    so the result never scores below the start.
    """
    t_hat = [float(x) for x in t_hat]
    best = vector_objective(route, t_hat, params, alpha, norm)
    for sweep in range(sweeps):
        improved = False
        for h, hop in enumerate(route.hops):
            others = [(other, x) for i, (other, x) in enumerate(zip(route.hops, t_hat)) if i != h]
            fixed_latency = sum(float(model_core.expected_hop_latency(o, x, params)) for o, x in others)
            fixed_rate = min((float(model_core.expected_hop_rate(o, x, params)) for o, x in others), default=np.inf)

            def f(t, hop=hop, fixed_latency=fixed_latency, fixed_rate=fixed_rate):
                latency = fixed_latency + np.asarray(model_core.expected_hop_latency(hop, t, params))
                rate = np.minimum(fixed_rate, np.asarray(model_core.expected_hop_rate(hop, t, params)))
                return weighted_sum(alpha, norm.normalize_rate(rate), norm.normalize_latency(latency))

            candidate = list(t_hat)
            candidate[h] = maximize(f, params)[0]
            value = vector_objective(route, candidate, params, alpha, norm)
            if value > best:
                t_hat, best, improved = candidate, value, True
        if not improved:
            logger.debug(f"Coordinate ascent on {route.nodes} settled after {sweep + 1} sweeps at {best:.6f}")
            break
    return t_hat


def refine_distributed(route: Route, params: SystemParams, alpha: float, norm: NormalizationContext,
                       starts: Sequence[Sequence[float]], route_index: int = 0) -> OptimizationOutcome:
    """Coordinate ascent from the best of ``starts``; the first start wins ties."""
    if not starts:
        raise ValueError("refine_distributed needs at least one starting vector")
    scores = [vector_objective(route, start, params, alpha, norm) for start in starts]
    start = starts[int(np.argmax(scores))]
    t_hat = coordinate_ascent(route, params, alpha, norm, start)
    return _distributed_outcome(route, t_hat, params, alpha, norm, route_index)

# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def verify_concavity(route: Route, params: SystemParams, alpha: float, points_per_piece: int = 64,
                     tolerance: float = 1e-9, estimator: str = "min_of_means") -> ConcavityReport:
    """Second central differences of the raw objective inside every smooth piece."""
    f = raw_objective(route, params, alpha, estimator)
    offset = LEFT_LIMIT_OFFSET * params.delta_t
    per_piece, worst, total, passed = [], -np.inf, 0, 0
    for a, b in piece_bounds(params):
        t = np.linspace(a, b - offset, points_per_piece)
        values = np.asarray(f(t))
        second = values[:-2] - 2 * values[1:-1] + values[2:]
        ok = int(np.count_nonzero(second <= tolerance))
        per_piece.append(ok / second.size)
        worst = max(worst, float(second.max()))
        total += second.size
        passed += ok
    return ConcavityReport(per_piece=per_piece, fraction=passed / total,
                           worst_second_difference=worst, tolerance=tolerance)


def _stationary_on_piece(f: Objective, t_star: float, params: SystemParams) -> bool:
    h = DERIVATIVE_STEP * params.delta_t
    interior = np.linspace(0.0, params.T, 257)[1:-1]
    scale = max(1.0 / params.T, float(np.max(np.abs(_derivative(f, interior, h)))))
    tolerance = KKT_TOLERANCE * scale

    T = params.T
    if t_star >= T:
        # T may sit on a breakpoint, so a jump up into T also certifies it
        slope = (float(f(T - h)) - float(f(T - 3 * h))) / (2 * h)
        return slope >= -tolerance or float(f(T)) >= float(f(T - h))
    pieces = piece_bounds(params)
    a, b = pieces[min(model_core.max_trials(t_star, params.delta_t), len(pieces) - 1)]
    value = float(f(t_star))
    ok = True
    if b - t_star >= 2 * h:
        right = (float(f(t_star + h)) - value) / h
        ok = ok and right <= tolerance
    if t_star - a >= 2 * h:
        left = (value - float(f(t_star - h))) / h
        ok = ok and left >= -tolerance
    return ok


def kkt_stationarity_check(t_star: float, route: Route, params: SystemParams, alpha: float,
                           norm: Optional[NormalizationContext] = None,
                           estimator: str = "min_of_means") -> bool:
    """
    First-order optimality of ``t_star`` on its smooth piece.

    One-sided slopes are used throughout so that kinks of the weakest-hop rate
    are certified too: the objective must not rise to the right of ``t_star``
    nor fall towards it from the left. Next to a piece end only the side inside
    the piece is checked.
    """
    norm = norm or build_normalization([route], params, estimator=estimator)
    return _stationary_on_piece(global_objective(route, params, alpha, norm, estimator), t_star, params)


def hop_kkt_check(t_hat: float, hop: Hop, params: SystemParams, alpha: float,
                  hop_norm: Optional[NormalizationContext] = None) -> bool:
    """``kkt_stationarity_check`` for one hop's own weighted sum."""
    hop_norm = hop_norm or build_hop_normalization(hop, params)
    return _stationary_on_piece(hop_objective(hop, params, alpha, hop_norm), t_hat, params)
