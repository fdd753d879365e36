import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from conftest import BASE_COSTS, symmetric, valid_params
from follower import best_response_price
from market import (
    MarketParams,
    NoOperate,
    Operate,
    coalition_utility,
    demand_in_house,
    demand_out_house,
    derive,
    follower_utility,
    leader_utility,
    utility_breakdown,
    validate_assumptions,
)
from regimes import solve_coexistence


def test_symmetric_assumptions_hold():
    report = validate_assumptions(symmetric(0.5))
    assert report.a1_holds and report.a2_holds
    assert report.a1_in_house_slack == pytest.approx(100 - 0.7 - 2 * math.sqrt(2))
    assert report.a2_slack == pytest.approx(5 - 0.5)
    assert report.failures() == []


def test_zero_costs_make_a2_vacuous():
    params = MarketParams(d_bar_i=100, d_bar_j=100, alpha_i=0.1, alpha_j=0.1, eps=0,
                          c_i=0, c_j=0, c_s=0, o_i=0, o_j=0, o_s=0)
    report = validate_assumptions(params)
    assert report.a1_holds
    assert report.a2_holds
    assert report.a2_slack == math.inf


def test_zero_in_house_potential_fails_a1():
    params = symmetric(0.5).model_copy(update={"d_bar_i": 0.0})
    report = validate_assumptions(params)
    assert not report.a1_holds
    assert report.a1_in_house_slack < 0
    assert [name for name, _ in report.failures()] == ["A.1 in-house"]


@pytest.mark.parametrize("field, value", [("alpha_i", 0.0), ("eps", 1.5), ("c_s", -1.0), ("o_j", math.nan)])
def test_malformed_params_are_rejected(field, value):
    values = symmetric(0.5).model_dump()
    values[field] = value
    with pytest.raises(ValidationError):
        MarketParams(**values)


def test_unknown_param_key_is_rejected():
    with pytest.raises(ValidationError, match="gamma"):
        MarketParams(**symmetric(0.5).model_dump(), gamma=1.0)


@given(valid_params(), st.floats(0, 100), st.floats(0, 100))
def test_assumptions_monotone_in_market_potential(params, extra_i, extra_j):
    bigger = params.model_copy(update={"d_bar_i": params.d_bar_i + extra_i, "d_bar_j": params.d_bar_j + extra_j})
    assert validate_assumptions(bigger).a1_holds


def test_derived_constants_symmetric():
    dc = derive(symmetric(0.5))
    assert dc.p_mx == pytest.approx(1500)
    assert dc.p_tilde_mx == pytest.approx(1500)
    assert dc.p_sw == pytest.approx(1020)
    assert dc.w1 < 0 and dc.w3 < 0
    assert dc.scale == pytest.approx(150000)


def test_switching_price_infinite_without_substitution():
    assert derive(symmetric(0.0)).p_sw == math.inf


class TestDemand:
    def test_in_house_clamped_at_zero(self):
        assert demand_in_house(symmetric(0.0), 1000.0, Operate(p_tilde=300.0)) == 0.0

    def test_in_house_substitution(self):
        assert demand_in_house(symmetric(0.5), 100.0, Operate(p_tilde=777.0)) == pytest.approx(128.85)

    def test_in_house_ignores_absent_follower(self):
        assert demand_in_house(symmetric(0.5), 100.0, NoOperate()) == pytest.approx(90.0)

    def test_both_caps_leave_spillover_only(self):
        params = symmetric(0.5)
        dc = derive(params)
        assert demand_in_house(params, dc.p_mx, Operate(p_tilde=dc.p_tilde_mx)) == pytest.approx(0.25 * 100)
        assert demand_out_house(params, dc.p_mx, dc.p_tilde_mx) == pytest.approx(0.25 * 100)

    def test_out_house(self):
        assert demand_out_house(symmetric(0.5), 100.0, 777.0) == pytest.approx(27.3)

    def test_out_house_clamped(self):
        assert demand_out_house(symmetric(0.0), 50.0, 1000.0) == 0.0


class TestUtilities:
    def test_shut_in_house_without_follower_pays_fixed_costs(self):
        assert leader_utility(symmetric(0.5), 100.0, 500.0, NoOperate(), in_house_open=False) == -20.0

    def test_coalition_not_operating(self):
        assert leader_utility(symmetric(0.5), 100.0, 500.0, NoOperate(), coalition_operates=False) == 0.0

    def test_decoupled_monopoly(self):
        params = symmetric(0.0)
        value = leader_utility(params, 503.5, 499.5, Operate(p_tilde=751.75))
        assert value == pytest.approx(36956.8375)

    def test_wholesale_at_cost_with_priced_out_in_house(self):
        assert leader_utility(symmetric(0.0), 1000.0, 3.0, Operate(p_tilde=600.0)) == pytest.approx(-20.0)

    def test_follower_value(self):
        assert follower_utility(symmetric(0.5), 100.0, 500.0, Operate(p_tilde=777.0)) == pytest.approx(7442.9)

    def test_follower_zero_margin(self):
        assert follower_utility(symmetric(0.5), 100.0, 500.0, Operate(p_tilde=504.0)) == pytest.approx(-10.0)

    def test_follower_absent(self):
        assert follower_utility(symmetric(0.5), 100.0, 500.0, NoOperate()) == 0.0

    def test_breakdown_sums(self):
        b = utility_breakdown(symmetric(0.5), 100.0, 500.0, Operate(p_tilde=777.0))
        assert b.leader_utility == pytest.approx(b.retail_margin_revenue + b.wholesale_revenue - 20)
        assert b.demand_j == pytest.approx(27.3)


@given(valid_params(), st.floats(0, 1), st.floats(0, 1))
def test_vectorised_utility_matches_scalar(params, u, v):
    dc = derive(params)
    p, q = u * dc.p_mx, v * dc.p_tilde_mx
    price, operates, _ = best_response_price(params, p, q)
    action = Operate(p_tilde=float(price)) if operates else NoOperate()
    expected = leader_utility(params, p, q, action)
    assert coalition_utility(params, p, q, price, operates) == pytest.approx(expected, rel=1e-12, abs=1e-9)


def test_vectorised_utility_on_grid():
    params = MarketParams(d_bar_i=80, d_bar_j=120, alpha_i=0.2, alpha_j=0.1, eps=0.3, **BASE_COSTS)
    grid_p, grid_q = np.meshgrid(np.linspace(0, 400, 7), np.linspace(0, 900, 5), indexing="ij")
    price, operates, _ = best_response_price(params, grid_p, grid_q)
    values = coalition_utility(params, grid_p, grid_q, price, operates)
    assert values.shape == (7, 5)
    assert values[0, 0] == pytest.approx(leader_utility(params, 0.0, 0.0, Operate(p_tilde=float(price[0, 0]))))


class TestUnderflowingDenominators:
    @pytest.mark.parametrize("eps", [5e-324, 1e-310])
    def test_vanishing_substitution_behaves_like_none(self, eps):
        params = symmetric(eps)
        dc = derive(params)
        assert dc.p_sw == math.inf
        assert dc.phi_root == math.inf
        winner = solve_coexistence(params).winner
        baseline = solve_coexistence(symmetric(0.0)).winner
        assert winner.regime is baseline.regime
        assert winner.leader_value == pytest.approx(baseline.leader_value, rel=1e-12)

    def test_vanishing_in_house_cost_counts_as_zero(self):
        tiny = MarketParams(**{**symmetric(0.5).model_dump(), "c_i": 5e-324})
        zero = MarketParams(**{**symmetric(0.5).model_dump(), "c_i": 0.0})
        report = validate_assumptions(tiny)
        assert report.a2_slack == math.inf
        assert report.a2_holds
        assert solve_coexistence(tiny).winner.leader_value == solve_coexistence(zero).winner.leader_value
