"""
Closed-form reformulation of the delivery model.

Latency collapses to kT plus a per-hop correction; the E2E rate is split into
the all-success, all-failure and mixture scenarios, whose rates are driven by
order statistics of the per-hop discovery times: the maximum of geometric trial
counts on success and the maximum of exponential RSU waits on failure.
"""
from typing import Callable, Optional, Sequence
import logging
import math
import warnings

import numpy as np
from scipy import integrate

from src.analytics import model_core
from src.models.errors import InvalidRegimeError, QuadratureError
from src.models.outcomes import CoefficientSet, ScenarioDecomposition
from src.models.params import Hop, Route, SystemParams

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-8
SURVIVAL_CUTOFF = 1e-9


def coefficients(hop: Hop, t: float, params: SystemParams) -> CoefficientSet:
    """Shorthand coefficients of a hop at duration ``t``."""
    T = params.T
    lam = hop.arrival_rate
    alpha_h = 1.0 / hop.deg
    beta = math.exp(-lam * t)
    theta = float(model_core.trial_failure_power(t, params))
    return CoefficientSet(
        t=t,
        alpha_h=alpha_h,
        beta_h=beta,
        theta_h=theta,
        phi_h=T + 1.0 / lam,
        zeta_h=alpha_h * params.r_o,
        iota_h=params.r_v2v * (T - 1.0 / lam) / T + params.r_o,
        kappa_h=params.r_v2i * T / (2 * T + 1.0 / lam),
        nu_h=-(params.r_o / T) * t,
        chi_h=(params.r_o - params.r_v2i) * t / (2 * T + 1.0 / lam),
        z=beta + theta - beta * theta,
    )


def _z(hop: Hop, t, params: SystemParams) -> np.ndarray:
    beta = np.asarray(model_core.candidate_absent(hop, t))
    theta = np.asarray(model_core.trial_failure_power(t, params))
    return beta + theta - beta * theta


def hop_latency_closed(hop: Hop, t, params: SystemParams):
    """T + (1 - alpha_h) phi_h z(t)."""
    value = params.T + (1.0 - 1.0 / hop.deg) * (params.T + 1.0 / hop.arrival_rate) * _z(hop, t, params)
    return model_core._out(value)


def hop_rate_closed(hop: Hop, t, params: SystemParams):
    """zeta_h + (1 - alpha_h)(1 - z)(iota_h + nu_h) + (1 - alpha_h) z (kappa_h + chi_h), with zeta_h = alpha_h r_O."""
    t_arr = np.asarray(t, dtype=float)
    T = params.T
    lam = hop.arrival_rate
    spread = 1.0 - 1.0 / hop.deg
    z = _z(hop, t_arr, params)
    iota = params.r_v2v * (T - 1.0 / lam) / T + params.r_o
    kappa = params.r_v2i * T / (2 * T + 1.0 / lam)
    nu = -(params.r_o / T) * t_arr
    chi = (params.r_o - params.r_v2i) * t_arr / (2 * T + 1.0 / lam)
    value = params.r_o / hop.deg + spread * (1.0 - z) * (iota + nu) + spread * z * (kappa + chi)
    return model_core._out(value)


def e2e_latency_closed(route: Route, t, params: SystemParams):
    """kT + sum over hops of (1 - alpha_h) phi_h z_h(t)."""
    total = route.k * params.T
    for hop in route.hops:
        total = total + (1.0 - 1.0 / hop.deg) * (params.T + 1.0 / hop.arrival_rate) * _z(hop, t, params)
    return model_core._out(total)


# ---------------------------------------------------------------------------
# order statistics
# ---------------------------------------------------------------------------

def geometric_max_cdf(p: float, n: int, x):
    """P(max of n iid Geometric(p) <= x) = (1 - (1 - p)^x)^n."""
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, 0.0, (1.0 - np.power(1.0 - p, np.maximum(x, 0.0))) ** n)


def geometric_max_pmf(p: float, n: int, x):
    """PMF of the maximum of ``n`` iid geometric variables on {1, 2, ...}."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    x = np.asarray(x, dtype=float)
    pmf = geometric_max_cdf(p, n, x) - geometric_max_cdf(p, n, x - 1)
    pmf = np.where(x >= 1, pmf, 0.0)
    return model_core._out(pmf)


def expected_max_discovery_time(route: Route, t: float, params: SystemParams) -> float:
    """Mean of the largest per-hop discovery time, the trial-count sum truncated at m."""
    m = model_core.max_trials(t, params.delta_t)
    xi = np.arange(1, m + 1)
    pmf = np.asarray(geometric_max_pmf(params.trial_success, route.k, xi))
    return float(np.sum(xi * pmf) * params.delta_t)


def e_c_all_success(route: Route, t: float, params: SystemParams) -> float:
    """Expected E2E rate when every hop discovers a candidate."""
    m = model_core.max_trials(t, params.delta_t)
    if m < 1:
        raise InvalidRegimeError(
            f"t = {t}s leaves no discovery trial of {params.delta_t}s; all-success has probability 0"
        )
    T = params.T
    longest = expected_max_discovery_time(route, t, params)
    return (params.r_v2v * (T - longest) + params.r_o * (T - t)) / T


def exponential_max_cdf(mu: Sequence[float], eta):
    """P(max of independent Exp(mu_h) <= eta)."""
    mu = np.asarray(mu, dtype=float)
    eta = np.asarray(eta, dtype=float)
    eta_pos = np.maximum(eta, 0.0)
    cdf = np.prod(1.0 - np.exp(-np.multiply.outer(eta_pos, mu)), axis=-1)
    return model_core._out(np.where(eta < 0, 0.0, cdf))


def exponential_max_pdf(mu: Sequence[float], eta):
    """Density of the maximum of independent exponential variables with rates ``mu``."""
    mu = np.asarray(mu, dtype=float)
    if mu.size == 0 or np.any(mu <= 0):
        raise ValueError("rates must be positive")
    eta = np.asarray(eta, dtype=float)
    decay = np.exp(-np.multiply.outer(np.maximum(eta, 0.0), mu))
    grown = 1.0 - decay
    total = np.zeros(eta.shape)
    for h in range(mu.size):
        others = np.prod(np.delete(grown, h, axis=-1), axis=-1) if mu.size > 1 else 1.0
        total = total + mu[h] * decay[..., h] * others
    return model_core._out(np.where(eta < 0, 0.0, total))


def exponential_tail_bound(mu: Sequence[float], cutoff: float = SURVIVAL_CUTOFF) -> float:
    """Point beyond which the survival of the exponential maximum stays below ``cutoff``."""
    mu = np.asarray(mu, dtype=float)
    return math.log(mu.size / cutoff) / float(mu.min())


def _quad(func: Callable[[float], float], lower: float, upper: float,
          points: Optional[Sequence[float]] = None) -> float:
    """scipy quad with warnings escalated to QuadratureError."""
    kwargs = {"epsabs": QUAD_EPSABS, "limit": 200}
    if points is not None:
        inner = sorted({float(p) for p in points if lower < p < upper})
        if inner:
            kwargs["points"] = inner
            kwargs["limit"] = max(200, 4 * len(inner))
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(func, lower, upper, **kwargs)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"integration over [{lower}, {upper}] failed: {exc}") from exc
    if not math.isfinite(value) or abserr > 100 * QUAD_EPSABS:
        raise QuadratureError(
            f"integration over [{lower}, {upper}] reached error {abserr:.3g} only"
        )
    return value


def expected_max_wait(mu: Sequence[float]) -> float:
    """Mean of the largest RSU candidate wait, integrating eta times the max density."""
    upper = exponential_tail_bound(mu)
    return _quad(lambda eta: eta * float(exponential_max_pdf(mu, eta)), 0.0, upper)


def expectation_from_survival(cdf: Callable[[float], float], upper: Optional[float] = None,
                              points: Optional[Sequence[float]] = None) -> float:
    """
    Mean of a non-negative variable from its CDF: integral of 1 - F over [0, upper].

    Args:
        cdf: CDF of the variable, callable on floats.
        upper: truncation point with 1 - F(upper) < 1e-9; searched by doubling
            from 1 when omitted.
        points: known discontinuities of ``cdf`` handed to the integrator.

    Returns:
        float: the expectation.
    """
    if upper is None:
        upper = 1.0
        for _ in range(80):
            if 1.0 - cdf(upper) < SURVIVAL_CUTOFF:
                break
            upper *= 2.0
        else:
            raise QuadratureError("survival function does not decay; expectation diverges")
    elif 1.0 - cdf(upper) >= SURVIVAL_CUTOFF:
        raise ValueError(f"survival at upper = {upper} is not below {SURVIVAL_CUTOFF}")
    if upper <= 0:
        return 0.0
    return _quad(lambda x: 1.0 - cdf(x), 0.0, upper, points=points)


def e_c_all_failure(route: Route, t: float, params: SystemParams) -> float:
    """Expected E2E rate when every hop falls back to its RSU."""
    T = params.T
    mu = [hop.arrival_rate for hop in route.hops]
    longest = expected_max_wait(mu)
    return (params.r_v2i * (T - t) + params.r_o * t) / (2 * T + longest)


# ---------------------------------------------------------------------------
# mixture scenario
# ---------------------------------------------------------------------------

def success_rate_support(t: float, params: SystemParams):
    """Success-branch rate for each trial count 1..m, decreasing in the count."""
    m = model_core.max_trials(t, params.delta_t)
    xi = np.arange(1, m + 1)
    T = params.T
    rates = (params.r_v2v * (T - xi * params.delta_t) + params.r_o * (T - t)) / T
    return xi, rates


def success_min_cdf(route: Route, t: float, params: SystemParams) -> Callable[[float], float]:
    """
    CDF of the weakest success-branch hop rate.

    Each hop's trial count is conditioned on landing within 1..m, so the
    largest count over k hops has CDF ((1 - q^x) / (1 - q^m))^k.
    """
    xi, rates = success_rate_support(t, params)
    m = xi.size
    q = 1.0 - params.trial_success
    norm = 1.0 - q ** m
    grid = np.arange(0, m + 1)
    cdf_xi = ((1.0 - np.power(q, grid)) / norm) ** route.k
    pmf = np.diff(cdf_xi)

    def cdf(x: float) -> float:
        return float(np.sum(pmf[rates <= x]))

    return cdf


def failure_min_cdf(route: Route, t: float, params: SystemParams) -> Callable[[float], float]:
    """CDF of the weakest failure-branch hop rate A / (2T + eta)."""
    T = params.T
    mu = np.asarray([hop.arrival_rate for hop in route.hops])
    amount = params.r_v2i * (T - t) + params.r_o * t

    def cdf(x: float) -> float:
        if x < 0:
            return 0.0
        if amount <= 0:
            return 1.0
        if x == 0:
            return 0.0
        threshold = amount / x - 2 * T
        if threshold <= 0:
            return 1.0
        return float(1.0 - np.prod(1.0 - np.exp(-mu * threshold)))

    return cdf


def e_c_mixture(route: Route, t: float, params: SystemParams) -> float:
    """
    Expected E2E rate when success, failure and forwarding hops mix.

    The rate is E[min(r_O, rho)], rho the weaker of the weakest success rate and
    the weakest failure rate; forwarding hops pin the route at r_O. Integrating
    the survival of rho over [0, r_O] puts weight F_rho(r_O) on the rho branch.
    """
    if route.k < 2:
        raise InvalidRegimeError("a mixture of success and failure hops needs at least two hops")
    T = params.T
    r_o = params.r_o
    m = model_core.max_trials(t, params.delta_t)
    f_fail = failure_min_cdf(route, t, params)
    fail_ceiling = (params.r_v2i * (T - t) + params.r_o * t) / (2 * T)
    if m >= 1:
        f_succ = success_min_cdf(route, t, params)
        _, support = success_rate_support(t, params)
        upper = min(float(support[0]), fail_ceiling)
        points = support
    else:
        # no success hop can exist: rho is the weakest failure rate alone
        f_succ = lambda x: 0.0  # noqa: E731
        upper = fail_ceiling
        points = None

    def rho_cdf(x: float) -> float:
        if x >= upper:
            return 1.0
        fs, ff = f_succ(x), f_fail(x)
        return fs + ff - fs * ff

    cap = min(upper, r_o)

    def capped_cdf(x: float) -> float:
        return 1.0 if x >= cap else rho_cdf(x)

    return expectation_from_survival(capped_cdf, upper=cap, points=points)


def scenario_probabilities(route: Route, t: float, params: SystemParams) -> ScenarioDecomposition:
    """Probabilities that all hops succeed, all fail, or anything else happens."""
    p_as = 1.0
    p_af = 1.0
    for hop in route.hops:
        p_as *= float(model_core.p_success(hop, t, params))
        p_af *= float(model_core.p_failure(hop, t, params))
    p_mix = min(1.0, max(0.0, 1.0 - p_as - p_af))
    return ScenarioDecomposition(p_all_success=p_as, p_all_failure=p_af, p_mixture=p_mix)


def scenario_decomposition(route: Route, t: float, params: SystemParams,
                           families: bool = True) -> ScenarioDecomposition:
    """
    Scenario probabilities together with the expected E2E rate of each scenario.

    ``c_mixture`` is the hop-resolved mixture rate; with ``families`` the
    family-level ``e_c_mixture`` is reported next to it for routes of two or more hops.
    """
    probs = scenario_probabilities(route, t, params)
    c_as = e_c_all_success(route, t, params) if probs.p_all_success > 0 else None
    c_af = e_c_all_failure(route, t, params) if probs.p_all_failure > 0 else None
    c_mix = c_families = None
    if probs.p_mixture > 0:
        c_mix = mixture_rate(route, t, params)
        if families and route.k >= 2:
            c_families = e_c_mixture(route, t, params)
    return probs.copy(update={"c_all_success": c_as, "c_all_failure": c_af, "c_mixture": c_mix,
                              "c_mixture_families": c_families})


# ---------------------------------------------------------------------------
# hop-resolved mixture
# ---------------------------------------------------------------------------

def success_rate_pmf(t: float, params: SystemParams):
    """Success-branch rates with their probabilities given that discovery succeeded within m trials."""
    xi, rates = success_rate_support(t, params)
    if xi.size == 0:
        return rates, np.zeros(0)
    q = 1.0 - params.trial_success
    pmf = np.power(q, xi - 1) * params.trial_success / (1.0 - q ** xi.size)
    return rates, pmf


def branch_survivals(hop: Hop, t: float, params: SystemParams):
    """
    P(branch taken and hop rate > x) for the forwarding, success and failure
    branches of one hop; the three add up to the survival of the hop rate.
    """
    T = params.T
    p_fwd = float(model_core.p_courier_forward(hop))
    p_s = float(model_core.p_success(hop, t, params))
    p_f = float(model_core.p_failure(hop, t, params))
    rates, pmf = success_rate_pmf(t, params)
    amount = params.r_v2i * (T - t) + params.r_o * t
    lam = hop.arrival_rate

    def forward(x: float) -> float:
        return p_fwd if x < params.r_o else 0.0

    def success(x: float) -> float:
        if p_s == 0.0:
            return 0.0
        return p_s * float(np.sum(pmf[rates > x]))

    def failure(x: float) -> float:
        if x <= 0:
            return p_f
        threshold = amount / x - 2 * T
        return p_f * -math.expm1(-lam * threshold) if threshold > 0 else 0.0

    return forward, success, failure


def mixture_rate(route: Route, t: float, params: SystemParams) -> float:
    """
    Expected E2E rate given the mixture scenario, with every hop keeping its own branch.

    Forwarding hops cap the route at r_O while success and failure hops bring
    their own rate distributions. The mixture share is E[min over hops] minus
    the all-success and all-failure parts, each integrated from its survival.
    """
    probs = scenario_probabilities(route, t, params)
    if probs.p_mixture <= 0:
        raise InvalidRegimeError(f"the mixture scenario has probability 0 at t = {t}s")
    parts = [branch_survivals(hop, t, params) for hop in route.hops]
    rates, _ = success_rate_pmf(t, params)
    T = params.T
    upper = max([params.r_o, (params.r_v2i * (T - t) + params.r_o * t) / (2 * T)] + [float(r) for r in rates])

    def mixed(x: float) -> float:
        total = every_success = every_failure = 1.0
        for forward, success, failure in parts:
            s, f = success(x), failure(x)
            total *= forward(x) + s + f
            every_success *= s
            every_failure *= f
        return total - every_success - every_failure

    mass = _quad(mixed, 0.0, upper, points=list(rates) + [params.r_o])
    return min(max(mass / probs.p_mixture, 0.0), upper)


def e2e_rate_closed(route: Route, t: float, params: SystemParams) -> float:
    """Expected E2E rate weighted over the all-success, all-failure and mixture scenarios."""
    if all(hop.deg == 1 for hop in route.hops):
        return params.r_o
    parts = scenario_decomposition(route, t, params, families=False)
    total = 0.0
    if parts.c_all_success is not None:
        total += parts.p_all_success * parts.c_all_success
    if parts.c_all_failure is not None:
        total += parts.p_all_failure * parts.c_all_failure
    if parts.c_mixture is not None:
        total += parts.p_mixture * parts.c_mixture
    return total
