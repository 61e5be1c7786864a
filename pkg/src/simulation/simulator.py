"""
Monte Carlo oracle for the hop-wise delivery model.

Snapshots are generated in fixed blocks. Block ``b`` of hop ``h`` owns its own
Philox stream keyed by ``(seed, b, h)``, so results do not depend on how many
worker threads process the blocks or in which order they finish.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union
import logging
import math

import numpy as np

from src.analytics import model_core
from src.models.params import Hop, Route, SystemParams
from src.models.simulation import Branch, EmpiricalEstimate, HopOutcome, SimConfig, SnapshotResult

logger = logging.getLogger(__name__)

BLOCK_SIZE = 1024
BACKHAUL_RATE_FACTOR = 4.0

BRANCH_CODES = (Branch.COURIER_FORWARD, Branch.DISCOVERY_SUCCESS,
                Branch.DISCOVERY_FAILURE, Branch.BACKHAUL_FORWARD)
FORWARD, SUCCESS, FAILURE, BACKHAUL = range(4)


def stream(seed: int, block: int, hop_index: int) -> np.random.Generator:
    """Counter-based generator for one (block, hop) pair."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block, hop_index))))


def backhaul_rate(params: SystemParams, configured: Optional[float] = None) -> float:
    return configured if configured is not None else BACKHAUL_RATE_FACTOR * params.r_v2i


def _check_duration(t: float, params: SystemParams) -> float:
    t = float(t)
    if not 0.0 <= t <= params.T:
        raise ValueError(f"discovery duration {t} outside [0, {params.T}]")
    return t


def sample_hop_outcomes(hop: Hop, t: float, params: SystemParams, rng: np.random.Generator, size: int,
                        mode: str = "coupled", backhaul: bool = False,
                        backhaul_link_rate: Optional[float] = None) -> Dict[str, np.ndarray]:
    """
    Draw ``size`` independent realizations of one hop.

    Draw order per call is fixed: direction, candidate arrival, trials needed,
    RSU candidate wait. The backhaul flag only changes how failures are
    resolved, never what is drawn.

    Returns:
        Dict of arrays ``branch`` (codes into BRANCH_CODES), ``latency``,
        ``discovery_time`` and ``rate``
    """
    t = _check_duration(t, params)
    T, dt = params.T, params.delta_t
    scale = 1.0 / hop.arrival_rate
    direction = rng.random(size)
    arrival = rng.exponential(scale, size)
    trials = rng.geometric(params.trial_success, size)
    rsu_wait = rng.exponential(scale, size)

    m = model_core.max_trials(t, dt)
    arrived = arrival <= t
    if mode == "coupled":
        first = np.maximum(1, np.ceil(arrival / dt - model_core._FLOOR_SLACK)).astype(np.int64)
        success = arrived & (trials <= m - first + 1)
        found_at = (first + trials - 1) * dt
    elif mode == "faithful":
        success = arrived & (trials <= m)
        found_at = trials * dt
    else:
        raise ValueError(f"unknown sampling mode '{mode}'")

    forward = direction < 1.0 / hop.deg
    success &= ~forward
    failure = ~forward & ~success

    branch = np.full(size, FAILURE, dtype=np.int8)
    branch[forward] = FORWARD
    branch[success] = SUCCESS

    latency = np.full(size, T)
    discovery = np.zeros(size)
    rate = np.full(size, params.r_o)

    rate[success] = params.r_v2v * (T - found_at[success]) / T + params.r_o * (T - t) / T
    discovery[success] = found_at[success]

    if backhaul:
        link = backhaul_rate(params, backhaul_link_rate)
        branch[failure] = BACKHAUL
        rate[failure] = (link * (T - t) + params.r_o * t) / T
    else:
        wait = rsu_wait[failure]
        latency[failure] = 2 * T + wait
        discovery[failure] = wait
        rate[failure] = (params.r_v2i * (T - t) + params.r_o * t) / (2 * T + wait)
    return {"branch": branch, "latency": latency, "discovery_time": discovery, "rate": rate}


def simulate_hop(hop: Hop, t: float, params: SystemParams, rng: np.random.Generator,
                 mode: str = "coupled", backhaul: bool = False,
                 backhaul_link_rate: Optional[float] = None) -> HopOutcome:
    """One realization of one hop."""
    draw = sample_hop_outcomes(hop, t, params, rng, 1, mode, backhaul, backhaul_link_rate)
    return HopOutcome(
        branch=BRANCH_CODES[int(draw["branch"][0])],
        latency=float(draw["latency"][0]),
        discovery_time=float(draw["discovery_time"][0]),
        hop_rate=float(draw["rate"][0]),
    )


def simulate_snapshot(route: Route, t: Union[float, Sequence[float]], params: SystemParams,
                      rng: np.random.Generator, mode: str = "coupled",
                      linked: Optional[Sequence[bool]] = None) -> SnapshotResult:
    """One end-to-end delivery along ``route``."""
    durations = _durations(route, t, params)
    linked = linked or [False] * route.k
    hops = [simulate_hop(hop, th, params, rng, mode, flag) for hop, th, flag in zip(route.hops, durations, linked)]
    return SnapshotResult(
        e2e_latency=sum(h.latency for h in hops),
        e2e_rate=min(h.hop_rate for h in hops),
        per_hop=hops,
    )


def _durations(route: Route, t: Union[float, Sequence[float]], params: SystemParams) -> List[float]:
    if np.ndim(t) == 0:
        return [_check_duration(t, params)] * route.k
    durations = [_check_duration(x, params) for x in t]
    if len(durations) != route.k:
        raise ValueError(f"expected {route.k} hop durations, got {len(durations)}")
    return durations


def _linked_hops(route: Route, pairs: Set[Tuple[int, int]]) -> List[bool]:
    return [(hop.rsu_id, route.next_rsu(index)) in pairs for index, hop in enumerate(route.hops)]


class RouteSimulator:
    """Runs the block-wise Monte Carlo for one route and aggregates the snapshots."""

    def __init__(self, route: Route, params: SystemParams, config: SimConfig,
                 backhaul_links: Optional[Sequence[Tuple[int, int]]] = None):
        self.logger = logging.getLogger(__name__)
        self.route = route
        self.params = params
        self.config = config
        pairs = set()
        if config.backhaul_enabled and backhaul_links:
            for a, b in backhaul_links:
                pairs.update({(a, b), (b, a)})
        self.linked = _linked_hops(route, pairs)

    def _block(self, block: int, size: int, durations: List[float]) -> Dict[str, np.ndarray]:
        draws = [
            sample_hop_outcomes(hop, th, self.params, stream(self.config.seed, block, index), size,
                                self.config.mode, self.linked[index], self.config.backhaul_rate)
            for index, (hop, th) in enumerate(zip(self.route.hops, durations))
        ]
        return {
            "latency": np.vstack([d["latency"] for d in draws]),
            "rate": np.vstack([d["rate"] for d in draws]),
            "branch": np.vstack([d["branch"] for d in draws]),
        }

    def run(self, t: Union[float, Sequence[float]]) -> EmpiricalEstimate:
        durations = _durations(self.route, t, self.params)
        n = self.config.n_snapshots
        sizes = [min(BLOCK_SIZE, n - start) for start in range(0, n, BLOCK_SIZE)]
        blocks = list(range(len(sizes)))

        def work(block: int) -> Dict[str, np.ndarray]:
            return self._block(block, sizes[block], durations)

        if self.config.workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                results = list(pool.map(work, blocks))
        else:
            results = [work(block) for block in blocks]

        latency = np.hstack([r["latency"] for r in results])
        rate = np.hstack([r["rate"] for r in results])
        branch = np.hstack([r["branch"] for r in results])
        e2e_latency = latency.sum(axis=0)
        e2e_rate = rate.min(axis=0)
        counts = np.bincount(branch.ravel(), minlength=len(BRANCH_CODES))
        total = branch.size

        def se(values: np.ndarray) -> float:
            return float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0

        estimate = EmpiricalEstimate(
            n_snapshots=n,
            mean_latency=float(np.mean(e2e_latency)),
            se_latency=se(e2e_latency),
            mean_rate=float(np.mean(e2e_rate)),
            se_rate=se(e2e_rate),
            p_fwd=counts[FORWARD] / total,
            p_succ=counts[SUCCESS] / total,
            p_fail=counts[FAILURE] / total,
            p_backhaul=counts[BACKHAUL] / total,
            per_hop_mean_latency=[float(x) for x in latency.mean(axis=1)],
            per_hop_mean_rate=[float(x) for x in rate.mean(axis=1)],
            branch_counts={code.value: int(counts[i]) for i, code in enumerate(BRANCH_CODES)},
        )
        self.logger.info(f"Simulated {n} snapshots in {len(blocks)} blocks on route {self.route.nodes}: "
                         f"latency {estimate.mean_latency:.4f} +/- {estimate.se_latency:.4f}")
        return estimate


def simulate_route(route: Route, t: Union[float, Sequence[float]], params: SystemParams,
                   config: SimConfig) -> EmpiricalEstimate:
    """Empirical E2E latency and rate of ``route`` without backhaul forwarding."""
    if config.backhaul_enabled:
        config = config.copy(update={"backhaul_enabled": False})
    return RouteSimulator(route, params, config).run(t)


def simulate_with_backhaul(route: Route, t: Union[float, Sequence[float]], params: SystemParams,
                           config: SimConfig, backhaul_links: Sequence[Tuple[int, int]]) -> EmpiricalEstimate:
    """
    Same snapshots as ``simulate_route``, but a failed discovery at a hop whose
    RSU is linked to the next RSU is resolved over the backhaul.
    """
    if not config.backhaul_enabled:
        config = config.copy(update={"backhaul_enabled": True})
    return RouteSimulator(route, params, config, backhaul_links).run(t)
