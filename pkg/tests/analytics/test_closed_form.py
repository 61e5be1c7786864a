import numpy as np
import pytest
from scipy import integrate

from src.analytics import closed_form, model_core
from src.analytics.optimizer import breakpoints
from src.models.errors import InvalidRegimeError
from src.models.params import Hop, Route, SystemParams
from src.models.simulation import SimConfig
from src.routing.paths import spr_route
from src.simulation.simulator import simulate_route


def test_latency_closed_form_matches_direct(random_routes, params):
    t = np.union1d(np.linspace(0.0, params.T, 100), breakpoints(params))
    for route in random_routes:
        direct = model_core.expected_e2e_latency(route, t, params)
        closed = closed_form.e2e_latency_closed(route, t, params)
        assert np.allclose(direct, closed, rtol=0, atol=1e-9)


def test_hop_rate_closed_form_matches_direct(params):
    hop = Hop(arrival_rate=0.15, deg=3, rsu_id=0)
    assert closed_form.hop_rate_closed(hop, 8.0, params) == pytest.approx(
        model_core.expected_hop_rate(hop, 8.0, params), abs=1e-9)


def test_hop_rate_closed_form_matches_direct_everywhere(random_routes, params):
    t = np.linspace(0.0, params.T, 100)
    for route in random_routes:
        for hop in route.hops:
            assert np.allclose(closed_form.hop_rate_closed(hop, t, params),
                               model_core.expected_hop_rate(hop, t, params), rtol=0, atol=1e-9)


def test_coefficients(hop, params):
    c = closed_form.coefficients(hop, 8.0, params)
    assert c.alpha_h == pytest.approx(1 / 3)
    assert c.z == pytest.approx(c.beta_h + c.theta_h - c.beta_h * c.theta_h)
    assert c.phi_h == pytest.approx(params.T + 10.0)
    assert c.zeta_h == pytest.approx(params.r_o / 3)
    assert closed_form.hop_latency_closed(hop, 8.0, params) == pytest.approx(
        params.T + (1 - c.alpha_h) * c.phi_h * c.z)


def test_geometric_max_pmf_normalises():
    x = np.arange(1, 400)
    for p, n in [(0.3, 4), (0.9, 2), (0.998, 5)]:
        assert np.sum(closed_form.geometric_max_pmf(p, n, x)) == pytest.approx(1.0, abs=1e-9)


def test_geometric_max_pmf_support():
    assert closed_form.geometric_max_pmf(0.5, 3, 0) == 0.0
    assert closed_form.geometric_max_pmf(0.5, 1, 1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        closed_form.geometric_max_pmf(0.0, 2, 1)
    with pytest.raises(ValueError):
        closed_form.geometric_max_pmf(0.5, 0, 1)


def test_exponential_max_pdf_normalises():
    mu = [0.1, 0.2, 0.05]
    total, _ = integrate.quad(lambda e: closed_form.exponential_max_pdf(mu, e), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_exponential_max_pdf_rejects_bad_rates():
    with pytest.raises(ValueError):
        closed_form.exponential_max_pdf([0.1, 0.0], 1.0)


def test_expected_max_wait_harmonic_sum():
    assert closed_form.expected_max_wait([0.1, 0.1, 0.1]) == pytest.approx(10 * (1 + 1 / 2 + 1 / 3), rel=1e-6)
    assert closed_form.expected_max_wait([0.1, 0.1]) == pytest.approx(15.0, rel=1e-6)


def test_expectation_from_survival_of_exponential():
    assert closed_form.expectation_from_survival(lambda x: 1 - np.exp(-0.2 * x)) == pytest.approx(5.0, abs=1e-7)
    mu = [0.1, 0.1]
    mean = closed_form.expectation_from_survival(lambda x: float(closed_form.exponential_max_cdf(mu, x)))
    assert mean == pytest.approx(15.0, rel=1e-6)


def test_expectation_from_survival_rejects_short_upper_bound():
    with pytest.raises(ValueError):
        closed_form.expectation_from_survival(lambda x: 1 - np.exp(-0.2 * x), upper=1.0)


def test_expected_max_wait_sampling_oracle():
    mu = np.array([0.1, 0.25, 0.05])
    rng = np.random.default_rng(11)
    samples = rng.exponential(1 / mu, size=(1_000_000, 3)).max(axis=1)
    se = samples.std(ddof=1) / np.sqrt(samples.size)
    assert abs(closed_form.expected_max_wait(mu) - samples.mean()) < 4 * se


def test_expected_max_discovery_time_sampling_oracle():
    params = SystemParams(epsilon=0.3)
    route = Route(hops=[Hop(arrival_rate=0.1, deg=2, rsu_id=h) for h in range(3)], source=0, destination=3)
    rng = np.random.default_rng(5)
    samples = rng.geometric(params.trial_success, size=(1_000_000, 3)).max(axis=1) * params.delta_t
    se = samples.std(ddof=1) / np.sqrt(samples.size)
    expected = closed_form.expected_max_discovery_time(route, params.T, params)
    assert abs(expected - samples.mean()) < 4 * se


def test_all_success_needs_a_trial(route, params):
    with pytest.raises(InvalidRegimeError):
        closed_form.e_c_all_success(route, 0.05, params)
    assert closed_form.e_c_all_success(route, 8.0, params) > 0


def test_all_failure_rate(params):
    route = Route(hops=[Hop(arrival_rate=0.1, deg=2, rsu_id=0), Hop(arrival_rate=0.1, deg=2, rsu_id=1)],
                  source=0, destination=2)
    expected = params.r_v2i * params.T / (2 * params.T + 15.0)
    assert closed_form.e_c_all_failure(route, 0.0, params) == pytest.approx(expected, rel=1e-6)


def test_scenario_probabilities_match_hop_products(route, params):
    probs = closed_form.scenario_probabilities(route, 8.0, params)
    p_succ = np.prod([model_core.p_success(hop, 8.0, params) for hop in route.hops])
    p_fail = np.prod([model_core.p_failure(hop, 8.0, params) for hop in route.hops])
    assert probs.p_all_success == pytest.approx(p_succ, abs=1e-12)
    assert probs.p_all_failure == pytest.approx(p_fail, abs=1e-12)
    assert probs.p_all_success + probs.p_all_failure + probs.p_mixture == pytest.approx(1.0, abs=1e-12)


def test_mixture_needs_two_hops(params):
    single = Route(hops=[Hop(arrival_rate=0.1, deg=2, rsu_id=0)], source=0, destination=1)
    with pytest.raises(InvalidRegimeError):
        closed_form.e_c_mixture(single, 8.0, params)


def test_mixture_with_saturated_cellular_rate(route):
    # every success rate exceeds every failure rate and r_O caps nothing,
    # so the mixture reduces to the weakest failure rate
    params = SystemParams(r_o=6.0)
    t = 8.0
    T = params.T
    amount = params.r_v2i * (T - t) + params.r_o * t
    mu = [hop.arrival_rate for hop in route.hops]
    oracle, _ = integrate.quad(
        lambda e: amount / (2 * T + e) * closed_form.exponential_max_pdf(mu, e), 0, np.inf)
    assert closed_form.e_c_mixture(route, t, params) == pytest.approx(oracle, abs=1e-6)


def test_mixture_without_trials_is_failure_limited(route, params):
    value = closed_form.e_c_mixture(route, 0.0, params)
    assert 0.0 < value <= params.r_o


def test_e2e_rate_closed_single_exit_route(params):
    route = Route(hops=[Hop(arrival_rate=0.1, deg=1, rsu_id=h) for h in range(3)], source=0, destination=3)
    assert closed_form.e2e_rate_closed(route, 8.0, params) == params.r_o


def test_e2e_rate_closed_is_weighted_scenarios(route, params):
    parts = closed_form.scenario_decomposition(route, 8.0, params)
    expected = (parts.p_all_success * parts.c_all_success
                + parts.p_all_failure * parts.c_all_failure
                + parts.p_mixture * parts.c_mixture)
    assert closed_form.e2e_rate_closed(route, 8.0, params) == pytest.approx(expected)
    assert 0.0 < expected < max(params.r_v2v, params.r_v2i, params.r_o) + params.r_o


def test_mixture_matches_sampled_family_minimum(default_scenario, params):
    spr = spr_route(default_scenario.topology, 0, 8)
    route = Route(hops=spr.hops[:2], source=spr.source, destination=spr.nodes[2])
    t, n = 8.0, 1_000_000
    T = params.T
    rng = np.random.default_rng(2024)
    m = model_core.max_trials(t, params.delta_t)
    q = 1.0 - params.trial_success
    # trial counts conditioned on landing within 1..m, by inverting their CDF
    u = rng.random((route.k, n))
    xi = np.clip(np.ceil(np.log1p(-u * (1.0 - q ** m)) / np.log(q)), 1, m).max(axis=0)
    c_succ = (params.r_v2v * (T - xi * params.delta_t) + params.r_o * (T - t)) / T
    mu = np.array([hop.arrival_rate for hop in route.hops])
    eta = rng.exponential(1.0 / mu[:, None], (route.k, n)).max(axis=0)
    c_fail = (params.r_v2i * (T - t) + params.r_o * t) / (2 * T + eta)
    samples = np.minimum(params.r_o, np.minimum(c_succ, c_fail))
    se = samples.std(ddof=1) / np.sqrt(n)

    value = closed_form.e_c_mixture(route, t, params)
    assert abs(value - samples.mean()) <= 4 * se + 1e-6
    assert value < params.r_o


def test_single_hop_mixture_is_forwarding(params):
    route = Route(hops=[Hop(arrival_rate=0.1, deg=3, rsu_id=0)], source=0, destination=1)
    assert closed_form.mixture_rate(route, 8.0, params) == pytest.approx(params.r_o, abs=1e-7)


def test_single_exit_mixture_is_forwarding(params):
    route = Route(hops=[Hop(arrival_rate=0.1, deg=1, rsu_id=h) for h in range(2)], source=0, destination=2)
    assert closed_form.mixture_rate(route, 8.0, params) == pytest.approx(params.r_o, abs=1e-7)


def test_decomposition_reports_both_mixture_rates(route, params):
    parts = closed_form.scenario_decomposition(route, 8.0, params)
    assert parts.c_mixture == pytest.approx(closed_form.mixture_rate(route, 8.0, params))
    assert parts.c_mixture_families == pytest.approx(closed_form.e_c_mixture(route, 8.0, params))
    assert closed_form.scenario_decomposition(route, 8.0, params, families=False).c_mixture_families is None


def test_e2e_rate_closed_tracks_simulator(default_scenario, params):
    route = spr_route(default_scenario.topology, 0, 8)
    t = 8.0
    estimate = simulate_route(route, t, params, SimConfig(n_snapshots=100_000, seed=3, mode="faithful"))
    assert closed_form.e2e_rate_closed(route, t, params) == pytest.approx(estimate.mean_rate, rel=0.05)


def test_e2e_rate_closed_depends_on_duration(default_scenario, params):
    route = spr_route(default_scenario.topology, 0, 8)
    values = {round(closed_form.e2e_rate_closed(route, t, params), 9) for t in (1.0, 8.0, 15.0)}
    assert len(values) == 3


def test_geometric_max_pmf_sampling_oracle():
    n, p, x = 3, 0.36, 2
    rng = np.random.default_rng(13)
    draws = rng.geometric(p, size=(1_000_000, n)).max(axis=1)
    freq = np.mean(draws == x)
    expected = (1 - (1 - p) ** x) ** n - (1 - (1 - p) ** (x - 1)) ** n
    pmf = float(closed_form.geometric_max_pmf(p, n, x))
    assert pmf == pytest.approx(expected, abs=1e-12)
    assert abs(pmf - freq) <= 4 * np.sqrt(pmf * (1 - pmf) / draws.size)


@pytest.mark.parametrize("epsilon", [0.0, 1e-9])
def test_all_success_with_lossless_trials_takes_one_trial(epsilon):
    params = SystemParams(epsilon=epsilon)
    route = Route(hops=[Hop(arrival_rate=0.1, deg=2, rsu_id=0)], source=0, destination=1)
    t = 8.0
    assert closed_form.expected_max_discovery_time(route, t, params) == pytest.approx(params.delta_t, abs=1e-9)
    expected = (params.r_v2v * (params.T - params.delta_t) + params.r_o * (params.T - t)) / params.T
    assert closed_form.e_c_all_success(route, t, params) == pytest.approx(expected, abs=1e-9)
