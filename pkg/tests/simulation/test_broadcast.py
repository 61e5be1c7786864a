import logging

import pytest
from pydantic import ValidationError

from src.models.errors import UnknownSchemeError
from src.models.simulation import BroadcastTable
from src.simulation.broadcast import delta_t_for_scheme, params_for_scheme, validate_table


def test_default_lookup():
    assert delta_t_for_scheme("TD", 1) == 0.1
    assert delta_t_for_scheme("FD", 4) == pytest.approx(0.14)
    assert delta_t_for_scheme("CD", 4) == delta_t_for_scheme("FD", 4)
    assert delta_t_for_scheme("TD", 1) <= delta_t_for_scheme("SD", 4) <= delta_t_for_scheme("FD", 4)


@pytest.mark.parametrize("scheme, beams", [("XD", 1), ("TD", 2), ("FD", 0), ("SD", 9)])
def test_lookup_errors(scheme, beams):
    with pytest.raises(UnknownSchemeError):
        delta_t_for_scheme(scheme, beams)


def test_custom_table_lookup():
    table = BroadcastTable(entries={"TD": {1: 0.05}, "FD": {2: 0.2}})
    assert delta_t_for_scheme("FD", 2, table) == 0.2
    with pytest.raises(UnknownSchemeError):
        delta_t_for_scheme("CD", 2, table)


def test_default_table_ordering():
    report = validate_table(BroadcastTable.default())
    assert report["td_is_minimum"]
    assert all(report["fd_equals_cd"].values())
    assert all(report["sd_between"].values())
    assert sorted(report["sd_between"]) == list(range(1, 9))


def test_out_of_order_table_warns(caplog):
    table = BroadcastTable(entries={"TD": {1: 0.3}, "FD": {2: 0.2}, "CD": {2: 0.25}})
    with caplog.at_level(logging.WARNING):
        report = validate_table(table)
    assert not report["td_is_minimum"]
    assert report["fd_equals_cd"] == {2: False}
    assert "TD does not have the smallest" in caplog.text


def test_params_for_scheme(params):
    updated = params_for_scheme(params, "SD", 2)
    assert updated.delta_t == pytest.approx(0.11)
    assert updated.T == params.T and updated.r_o == params.r_o


def test_params_for_scheme_revalidates(params):
    table = BroadcastTable(entries={"TD": {1: params.T + 1}})
    with pytest.raises(ValidationError):
        params_for_scheme(params, "TD", 1, table)
