import pytest
from pydantic import ValidationError

from src.models.params import Hop, Route, SystemParams


def test_default_params():
    params = SystemParams()
    assert params.T == 20.0
    assert params.delta_t == 0.1
    assert params.epsilon == 1e-3
    assert params.trial_success == pytest.approx((1 - 1e-3) ** 2)


def test_params_reject_trial_longer_than_dwell():
    with pytest.raises(ValidationError):
        SystemParams(T=1.0, delta_t=2.0)


def test_params_reject_out_of_range():
    with pytest.raises(ValidationError):
        SystemParams(epsilon=1.0)
    with pytest.raises(ValidationError):
        SystemParams(alpha=1.5)
    with pytest.raises(ValidationError):
        SystemParams(T=0)


def test_params_are_immutable():
    params = SystemParams()
    with pytest.raises(TypeError):
        params.T = 10.0


def test_hop_validation():
    with pytest.raises(ValidationError):
        Hop(arrival_rate=0.0, deg=2, rsu_id=0)
    with pytest.raises(ValidationError):
        Hop(arrival_rate=0.1, deg=0, rsu_id=0)


def test_route_nodes_and_next_rsu(route):
    assert route.k == 3
    assert route.nodes == [0, 1, 2, 3]
    assert route.next_rsu(0) == 1
    assert route.next_rsu(2) == 3


def test_route_rejects_loops():
    hops = [Hop(arrival_rate=0.1, deg=2, rsu_id=0), Hop(arrival_rate=0.1, deg=2, rsu_id=0)]
    with pytest.raises(ValidationError):
        Route(hops=hops, source=0, destination=1)


def test_route_needs_a_hop():
    with pytest.raises(ValidationError):
        Route(hops=[], source=0, destination=1)
