"""
Hop-wise probabilistic model of store-carry-and-forward delivery.

Every function is pure and accepts either a scalar discovery duration ``t`` or a
numpy array of durations; the result has the shape of ``t``.
"""
from typing import List, Union
import logging

import numpy as np

from src.models.params import DeliveryEstimate, Hop, Route, SystemParams

logger = logging.getLogger(__name__)

Duration = Union[float, np.ndarray]

# keeps floor(j*dt / dt) == j under binary rounding
_FLOOR_SLACK = 1e-9


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def p_courier_forward(hop: Hop) -> float:
    """Probability that the courier itself drives on to the next hop: 1/Deg."""
    return 1.0 / hop.deg


def max_trials(t: Duration, delta_t: float):
    """Number of discovery trials that fit into ``t``: floor(t / delta_t)."""
    m = np.floor(np.asarray(t, dtype=float) / delta_t + _FLOOR_SLACK).astype(int)
    m = np.maximum(m, 0)
    return int(m) if m.ndim == 0 else m


def trial_failure_power(t: Duration, params: SystemParams):
    """theta(t) = (1 - (1 - eps)^2)^m, the chance that all m trials fail."""
    m = max_trials(t, params.delta_t)
    return _out(np.power(1.0 - params.trial_success, m))


def candidate_absent(hop: Hop, t: Duration):
    """beta(t) = exp(-lambda t), the chance that no candidate arrived within t."""
    return _out(np.exp(-hop.arrival_rate * np.asarray(t, dtype=float)))


def p_success(hop: Hop, t: Duration, params: SystemParams):
    """Courier discovers a candidate within t."""
    beta = candidate_absent(hop, t)
    theta = trial_failure_power(t, params)
    return _out((1.0 - p_courier_forward(hop)) * (1.0 - beta) * (1.0 - theta))


def p_failure(hop: Hop, t: Duration, params: SystemParams):
    """Courier fails to discover a candidate and falls back to the RSU."""
    beta = candidate_absent(hop, t)
    theta = trial_failure_power(t, params)
    return _out((1.0 - p_courier_forward(hop)) * ((1.0 - beta) * theta + beta))


def expected_hop_latency(hop: Hop, t: Duration, params: SystemParams):
    """
    Expected latency of one hop.

    Forwarding and successful discovery both take the dwell time T; a failed
    discovery adds the RSU upload, the mean RSU candidate wait 1/lambda and a
    second traversal.
    """
    T = params.T
    p_fwd = p_courier_forward(hop)
    p_succ = p_success(hop, t, params)
    p_fail = p_failure(hop, t, params)
    return _out(p_fwd * T + p_succ * T + p_fail * (2 * T + 1.0 / hop.arrival_rate))


def expected_e2e_latency(route: Route, t: Duration, params: SystemParams):
    """Sum of the expected hop latencies along the route."""
    return _out(sum(np.asarray(expected_hop_latency(hop, t, params)) for hop in route.hops))


def success_rate_mean(hop: Hop, t: Duration, params: SystemParams):
    """Hop rate after a successful discovery, with the discovery time replaced by 1/lambda."""
    t = np.asarray(t, dtype=float)
    T = params.T
    return _out(params.r_v2v * (T - 1.0 / hop.arrival_rate) / T + params.r_o * (T - t) / T)


def failure_rate_mean(hop: Hop, t: Duration, params: SystemParams):
    """Hop rate after a failed discovery, with the RSU wait replaced by 1/lambda."""
    t = np.asarray(t, dtype=float)
    T = params.T
    return _out((params.r_v2i * (T - t) + params.r_o * t) / (2 * T + 1.0 / hop.arrival_rate))


def expected_hop_rate(hop: Hop, t: Duration, params: SystemParams):
    """Expected achievable data rate of one hop, branch-weighted."""
    p_fwd = p_courier_forward(hop)
    p_succ = np.asarray(p_success(hop, t, params))
    p_fail = np.asarray(p_failure(hop, t, params))
    c_succ = np.asarray(success_rate_mean(hop, t, params))
    c_fail = np.asarray(failure_rate_mean(hop, t, params))
    return _out(p_fwd * params.r_o + p_succ * c_succ + p_fail * c_fail)


def e2e_rate_min_of_means(route: Route, t: Duration, params: SystemParams):
    """E2E rate as the weakest hop's expected rate."""
    rates = [np.asarray(expected_hop_rate(hop, t, params)) for hop in route.hops]
    return _out(np.minimum.reduce(rates))


def estimate_delivery(route: Route, t: float, params: SystemParams) -> DeliveryEstimate:
    """Evaluate the direct model of a route at one duration."""
    per_hop_latency = [float(expected_hop_latency(hop, t, params)) for hop in route.hops]
    per_hop_rate = [float(expected_hop_rate(hop, t, params)) for hop in route.hops]
    return DeliveryEstimate(
        e2e_latency=sum(per_hop_latency),
        e2e_rate=min(per_hop_rate),
        per_hop_latency=per_hop_latency,
        per_hop_rate=per_hop_rate,
    )


def regime_warnings(route: Route, params: SystemParams) -> List[str]:
    """
    Flag hops whose mean candidate wait exceeds the dwell time.

    The mean-substituted success rate uses T - 1/lambda, which turns negative
    for slow streets; the value is kept as is and reported here instead.
    """
    messages = []
    for index, hop in enumerate(route.hops):
        if params.T - 1.0 / hop.arrival_rate < 0:
            message = (
                f"hop {index} (RSU {hop.rsu_id}): 1/lambda = {1.0 / hop.arrival_rate:.3f}s "
                f"exceeds T = {params.T}s; success-branch rate term is negative"
            )
            logger.warning(message)
            messages.append(message)
    return messages
