import numpy as np
import pytest

from conftest import FAMILIES, draw_params, symmetric
from follower import Branch, best_response, best_response_price, theta
from geometry import RegionTag
from market import coalition_utility, derive
from oracle import OracleConfig, follower_grid_check, grid_leader_max, verify_regime, verify_solution
from regimes import RegimeKind, solve_at_par, solve_coexistence, solve_loss

ACCEPTANCE = OracleConfig(p_steps=500, q_steps=500, refinement_rounds=2)
SMALL = OracleConfig(p_steps=200, q_steps=200, refinement_rounds=2)


def test_config_rejects_degenerate_grids():
    with pytest.raises(ValueError):
        OracleConfig(p_steps=1)
    with pytest.raises(ValueError):
        OracleConfig(tolerance_rel=0)


def test_two_by_two_grid_picks_best_corner():
    params = symmetric(0.1)
    config = OracleConfig(p_steps=2, q_steps=2, refinement_rounds=0, tolerance_rel=1e-12)
    dc = derive(params)
    corners_p = np.array([0.0, 0.0, dc.p_mx, dc.p_mx])
    corners_q = np.array([0.0, 1.0, 0.0, 1.0]) * float(theta(params, dc.p_mx))
    price, operates, _ = best_response_price(params, corners_p, corners_q)
    expected = coalition_utility(params, corners_p, corners_q, price, operates).max()

    result = grid_leader_max(params, config, candidate=solve_coexistence(params).winner)
    assert result.best_value == pytest.approx(float(expected), rel=1e-12)
    assert not result.agrees


def test_history_never_decreases():
    result = grid_leader_max(symmetric(0.3), SMALL)
    assert len(result.history) == SMALL.refinement_rounds + 1
    assert all(b >= a for a, b in zip(result.history, result.history[1:]))


def test_refinement_shrinks_cell():
    params = symmetric(0.3)
    coarse = grid_leader_max(params, SMALL.model_copy(update={"refinement_rounds": 0}))
    fine = grid_leader_max(params, SMALL)
    assert fine.cell[0] < coarse.cell[0] / 50
    assert fine.best_value >= coarse.best_value


def test_underreported_candidate_is_flagged():
    params = symmetric(0.1)
    winner = solve_coexistence(params).winner
    scale = derive(params).scale
    lowered = winner.model_copy(update={"leader_value": winner.leader_value - 0.1 * scale})
    result = grid_leader_max(params, SMALL, candidate=lowered)
    assert not result.agrees
    assert result.gap_vs_candidate > 0.09 * scale


def test_separable_market_optimum():
    params = symmetric(0.0)
    result = grid_leader_max(params, ACCEPTANCE)
    assert result.best_point[0] == pytest.approx(503.5, abs=0.5)
    assert result.best_point[1] == pytest.approx(499.5, abs=0.5)
    assert result.best_value == pytest.approx(36956.8375, abs=1e-3 * derive(params).scale)


def test_thread_count_does_not_change_result():
    params = symmetric(0.7)
    serial = grid_leader_max(params, SMALL)
    threaded = grid_leader_max(params, SMALL.model_copy(update={"workers": 4}))
    assert threaded.best_point == serial.best_point
    assert threaded.best_value == serial.best_value


def test_loss_region_oracle_matches_loss_solution():
    params = symmetric(0.5)
    solution = solve_loss(params)
    config = SMALL.model_copy(update={"region_filter": RegionTag.FCO_LOSS})
    result = verify_regime(params, solution, config)
    assert result.agrees
    assert result.regime_at_best is RegionTag.FCO_LOSS


def test_at_par_point_is_the_exit_threshold():
    params = symmetric(0.9)
    solution = solve_at_par(params)
    assert solution.regime is RegimeKind.AT_PAR
    pushed = best_response(params, solution.p_opt, solution.q_opt * (1 + 1e-6))
    assert pushed.branch is Branch.NO_OPERATE


class TestFollowerGrid:
    def test_trivial_grid(self):
        assert follower_grid_check(symmetric(), 100.0, 50.0, steps=1)

    def test_price_above_threshold(self):
        params = symmetric()
        q = 10 * float(theta(params, 100.0)) + 1000
        assert follower_grid_check(params, 100.0, q, steps=1000)

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_closed_form_beats_grid(self, name, rng):
        params = FAMILIES[name](0.5)
        dc = derive(params)
        q_top = float(theta(params, dc.p_mx))
        for _ in range(1000):
            p = rng.uniform(0, dc.p_mx)
            q = rng.uniform(0, q_top)
            assert follower_grid_check(params, p, q, steps=10_000)


@pytest.mark.slow
class TestAcceptance:
    @pytest.mark.parametrize("name", sorted(FAMILIES))
    @pytest.mark.parametrize("eps", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_bundled_families(self, name, eps):
        params = FAMILIES[name](eps)
        result = verify_solution(params, solve_coexistence(params), ACCEPTANCE)
        assert result.agrees, result

    def test_random_markets(self, rng):
        for _ in range(20):
            params = draw_params(rng)
            result = verify_solution(params, solve_coexistence(params), ACCEPTANCE)
            assert result.agrees, (params, result)
