"""Substitutability sweeps and the large-eps checks built on them."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from pydantic import BaseModel, ConfigDict

from analysis import lemma2_condition
from errors import AssumptionViolated
from follower import theta
from geometry import h
from market import MarketParams, derive
from oracle import verify_solution
from regimes import RegimeKind, solve_coexistence

logger = logging.getLogger(__name__)

LARGE_EPS_REGIMES = (RegimeKind.AT_PAR, RegimeKind.MAX_PRICE)


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps: float
    winner_regime: Optional[RegimeKind] = None
    p_opt: Optional[float] = None
    q_opt: Optional[float] = None
    leader_value: Optional[float] = None
    follower_value: Optional[float] = None
    oracle_agrees: Optional[bool] = None
    reason: Optional[str] = None

    @property
    def skipped(self):
        return self.winner_regime is None


class Lemma2Check(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps: float
    condition_holds: bool
    predicted_regime: RegimeKind
    predicted_point: tuple[float, float]
    winner_regime: RegimeKind
    winner_point: tuple[float, float]

    def matches(self, cell_p, cell_q):
        return (self.predicted_regime is self.winner_regime
                and abs(self.predicted_point[0] - self.winner_point[0]) <= cell_p
                and abs(self.predicted_point[1] - self.winner_point[1]) <= cell_q)


def eps_range(eps_from, eps_to, eps_step):
    """Inclusive grid without accumulated floating drift."""
    if eps_step <= 0:
        raise ValueError(f"eps_step must be positive, got {eps_step!r}")
    count = int(round((eps_to - eps_from) / eps_step))
    return [round(eps_from + k * eps_step, 12) for k in range(count + 1)]


def _check_grid(eps_grid):
    for eps in eps_grid:
        if not 0 <= eps <= 1:
            raise ValueError(f"eps {eps!r} outside [0, 1]")
    for left, right in zip(eps_grid, eps_grid[1:]):
        if right <= left:
            raise ValueError(f"eps grid must be strictly increasing ({left!r} then {right!r})")


def _sweep_row(params_base, eps, oracle_config):
    params = params_base.with_eps(eps)
    try:
        report = solve_coexistence(params)
    except AssumptionViolated as exc:
        logger.warning("eps=%r skipped: %s", eps, exc)
        return SweepRow(eps=eps, reason=str(exc))
    agrees = None
    if oracle_config is not None:
        agrees = verify_solution(params, report, oracle_config).agrees
    winner = report.winner
    return SweepRow(
        eps=eps,
        winner_regime=winner.regime,
        p_opt=winner.p_opt,
        q_opt=winner.q_opt,
        leader_value=winner.leader_value,
        follower_value=winner.follower_value,
        oracle_agrees=agrees,
    )


def epsilon_sweep(params_base: MarketParams, eps_grid, oracle_config=None, workers=1):
    """One row per eps, in grid order regardless of worker count."""
    eps_grid = list(eps_grid)
    _check_grid(eps_grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(lambda eps: _sweep_row(params_base, eps, oracle_config), eps_grid))
    return [_sweep_row(params_base, eps, oracle_config) for eps in eps_grid]


def estimate_epsilon_bar(rows):
    """Smallest grid eps from which every solved winner is at-par or max-price."""
    estimate = None
    for row in reversed(rows):
        if row.skipped:
            continue
        if row.winner_regime not in LARGE_EPS_REGIMES:
            break
        estimate = row.eps
    return estimate


def lemma2_prediction(params: MarketParams, eps=0.95) -> Lemma2Check:
    params = params.with_eps(eps)
    report = solve_coexistence(params)
    p_mx = derive(params).p_mx
    holds = lemma2_condition(params)
    if holds:
        predicted = (RegimeKind.MAX_PRICE, (p_mx, float(h(params, p_mx))))
    else:
        predicted = (RegimeKind.AT_PAR, (p_mx, float(theta(params, p_mx))))
    winner = report.winner
    check = Lemma2Check(
        eps=eps,
        condition_holds=holds,
        predicted_regime=predicted[0],
        predicted_point=predicted[1],
        winner_regime=winner.regime,
        winner_point=(winner.p_opt, winner.q_opt),
    )
    if check.predicted_regime is not check.winner_regime:
        logger.warning("large-eps prediction %s disagrees with solved winner %s at eps=%r",
                       check.predicted_regime.value, check.winner_regime.value, eps)
    return check
