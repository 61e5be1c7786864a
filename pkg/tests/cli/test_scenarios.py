import pytest

from src.cli import scenarios
from src.models.errors import ConfigError, InvalidDimensionsError


def test_grid_layout():
    topology = scenarios.grid_topology(3, 3, 250.0, 0, (0.05, 0.3))
    assert len(topology.nodes) == 9
    assert len(topology.edges) == 24
    assert topology.position(0) == (0.0, 500.0)
    assert topology.position(8) == (500.0, 0.0)
    assert all(0.05 <= e.arrival_rate <= 0.3 for e in topology.edges)


def test_grid_rates_follow_seed():
    a = scenarios.grid_topology(3, 3, 250.0, 1, (0.05, 0.3))
    b = scenarios.grid_topology(3, 3, 250.0, 1, (0.05, 0.3))
    c = scenarios.grid_topology(3, 3, 250.0, 2, (0.05, 0.3))
    assert a == b
    assert a != c


def test_degenerate_interval():
    topology = scenarios.grid_topology(2, 2, 100.0, 0, (0.2, 0.2))
    assert all(e.arrival_rate == 0.2 for e in topology.edges)


@pytest.mark.parametrize("rows, cols", [(1, 3), (3, 1), (0, 0)])
def test_grid_too_small(rows, cols):
    with pytest.raises(InvalidDimensionsError):
        scenarios.grid_topology(rows, cols, 250.0, 0, (0.05, 0.3))


def test_default_scenario(default_scenario):
    assert default_scenario.source == 0
    assert default_scenario.destination == 8
    assert default_scenario.grid.rows == 3
    assert default_scenario.arrival_interval == (0.05, 0.3)


def test_regime_by_name():
    scenario = scenarios.build_grid_scenario(arrival_interval="rush_hour")
    assert all(0.2 <= e.arrival_rate <= 0.3 for e in scenario.topology.edges)
    with pytest.raises(ConfigError):
        scenarios.build_grid_scenario(arrival_interval="weekend")


def test_scale_arrival_rates(default_scenario):
    scaled = scenarios.scale_arrival_rates(default_scenario.topology, 2.0)
    for before, after in zip(default_scenario.topology.edges, scaled.edges):
        assert after.arrival_rate == pytest.approx(2 * before.arrival_rate)
    with pytest.raises(ValueError):
        scenarios.scale_arrival_rates(default_scenario.topology, 0.0)


def test_resolve_backhaul(default_scenario):
    topology = default_scenario.topology
    assert scenarios.resolve_backhaul(topology, "none") is topology
    full = scenarios.resolve_backhaul(topology, "full")
    assert len(full.backhaul_links) == 12
    listed = scenarios.resolve_backhaul(topology, [[0, 1], [1, 2]])
    assert listed.backhaul_links == [(0, 1), (1, 2)]
    with pytest.raises(ConfigError):
        scenarios.resolve_backhaul(topology, "partial")


def test_config_with_grid_section():
    scenario = scenarios.scenario_from_config({
        "grid": {"rows": 2, "cols": 4, "block_m": 100.0},
        "seed": 3,
        "arrival_interval": "off_peak",
        "backhaul": "full",
    })
    assert len(scenario.topology.nodes) == 8
    assert scenario.destination == 7
    assert scenario.topology.backhaul_links
    assert all(0.05 <= e.arrival_rate <= 0.15 for e in scenario.topology.edges)


def test_config_with_explicit_topology(default_scenario):
    config = default_scenario.to_config()
    config["destination"] = 4
    scenario = scenarios.scenario_from_config(config)
    assert scenario.destination == 4
    assert scenario.topology == default_scenario.topology


def test_config_errors():
    with pytest.raises(ConfigError):
        scenarios.scenario_from_config({"grid": {"rows": 2, "cols": 2}, "params": {"T": -1}})
    with pytest.raises(ConfigError):
        scenarios.scenario_from_config({"grid": {"rows": 2, "cols": 2}, "arrival_interval": "weekend"})


def test_load_default_scenario():
    assert scenarios.load_scenario() == scenarios.build_grid_scenario()


def test_route_filter(default_scenario):
    bounded = default_scenario.copy(update={"route_filter": 4})
    assert len(scenarios.scenario_routes(bounded)) == 6
    assert len(scenarios.scenario_routes(bounded, max_hops=6)) == 10
    assert len(scenarios.scenario_routes(bounded, max_hops=8)) == 12
