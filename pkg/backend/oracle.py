"""Brute-force grid oracle for the leader's (p, q) problem.

Only the leader's box is discretised; the follower always answers with its
closed-form best response.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from follower import best_response_price, follower_opt_utility, theta
from geometry import REGION_ORDER, RegionTag, region_codes, region_of
from market import MarketParams, coalition_utility, derive

logger = logging.getLogger(__name__)

# nodes evaluated per numpy batch
_BATCH_NODES = 250_000


class OracleConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    p_steps: int = Field(500, ge=2)
    q_steps: int = Field(500, ge=2)
    refinement_rounds: int = Field(2, ge=0)
    region_filter: Optional[RegionTag] = None
    tolerance_rel: float = Field(1e-3, gt=0)
    workers: int = Field(1, ge=1)


class OracleResult(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    best_point: Optional[tuple[float, float]]
    best_value: float
    regime_at_best: Optional[RegionTag]
    gap_vs_candidate: Optional[float] = None
    agrees: bool = False
    cell: tuple[float, float]
    history: list[float]
    candidate_point: Optional[tuple[float, float]] = None
    candidate_value: Optional[float] = None


def _scan_rows(params, p_axis, q_axis, code):
    grid_p, grid_q = np.meshgrid(p_axis, q_axis, indexing="ij")
    price, operates, _ = best_response_price(params, grid_p, grid_q)
    values = coalition_utility(params, grid_p, grid_q, price, operates)
    if code is not None:
        values = np.where(region_codes(params, grid_p, grid_q) == code, values, -np.inf)
    flat = int(np.argmax(values))
    return float(values.flat[flat]), flat // len(q_axis), flat % len(q_axis)


def _scan(params, p_axis, q_axis, code, workers):
    """Row-major argmax over the grid; the first maximal node wins."""
    rows = max(1, _BATCH_NODES // len(q_axis))
    starts = range(0, len(p_axis), rows)

    def batch(start):
        value, i, j = _scan_rows(params, p_axis[start:start + rows], q_axis, code)
        return value, start + i, j

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(batch, starts))
    else:
        results = [batch(start) for start in starts]

    best = results[0]
    for result in results[1:]:
        if result[0] > best[0]:
            best = result
    return best


def grid_leader_max(params: MarketParams, config: OracleConfig, candidate=None) -> OracleResult:
    """Scan [0, p_mx] x [0, theta(p_mx)] and zoom in around the incumbent.

    When ``candidate`` (a regime solution) is given the result carries the
    comparison against it.
    """
    dc = derive(params)
    q_top = float(theta(params, dc.p_mx))
    code = REGION_ORDER.index(config.region_filter) if config.region_filter is not None else None
    p_lo, p_hi, q_lo, q_hi = 0.0, dc.p_mx, 0.0, q_top

    best_value, best_point, history = -math.inf, None, []
    cell = (0.0, 0.0)
    for round_index in range(config.refinement_rounds + 1):
        p_axis = np.linspace(p_lo, p_hi, config.p_steps)
        q_axis = np.linspace(q_lo, q_hi, config.q_steps)
        cell = ((p_hi - p_lo) / (config.p_steps - 1), (q_hi - q_lo) / (config.q_steps - 1))
        value, i, j = _scan(params, p_axis, q_axis, code, config.workers)
        if value > best_value:
            best_value, best_point = value, (float(p_axis[i]), float(q_axis[j]))
        history.append(best_value)
        logger.info("oracle round %d: %dx%d grid, best %r at %r", round_index, config.p_steps, config.q_steps,
                    best_value, best_point)
        if best_point is None:
            break
        half_p = cell[0] * (config.p_steps - 1) / 20
        half_q = cell[1] * (config.q_steps - 1) / 20
        p_lo, p_hi = max(0.0, best_point[0] - half_p), min(dc.p_mx, best_point[0] + half_p)
        q_lo, q_hi = max(0.0, best_point[1] - half_q), min(q_top, best_point[1] + half_q)

    regime = region_of(params, *best_point) if best_point is not None else None
    result = OracleResult(best_point=best_point, best_value=best_value, regime_at_best=regime,
                          cell=cell, history=history)
    if candidate is None:
        return result
    return _compare(params, result, candidate, config)


def _nearby_tags(params, point, cell):
    dc = derive(params)
    offsets = np.array([-1.0, 0.0, 1.0])
    p = np.clip(point[0] + offsets[:, None] * cell[0], 0.0, dc.p_mx)
    q = np.clip(point[1] + offsets[None, :] * cell[1], 0.0, None)
    return {REGION_ORDER[code] for code in np.unique(region_codes(params, p, q))}


def _compare(params, result, candidate, config, check_region=True):
    scale = derive(params).scale
    candidate_point = (candidate.p_opt, candidate.q_opt)
    gap = result.best_value - candidate.leader_value
    value_ok = abs(gap) <= config.tolerance_rel * scale

    region_ok = True
    if check_region and result.best_point is not None:
        close = all(abs(a - b) <= c * (1 + 1e-9)
                    for a, b, c in zip(result.best_point, candidate_point, result.cell))
        region_ok = close or result.regime_at_best in _nearby_tags(params, candidate_point, result.cell)
    agrees = result.best_point is not None and value_ok and region_ok
    if not agrees:
        logger.warning("oracle disagrees: gap %r (tolerance %r), oracle region %s", gap,
                       config.tolerance_rel * scale, result.regime_at_best)
    return result.model_copy(update={
        "gap_vs_candidate": gap,
        "agrees": agrees,
        "candidate_point": candidate_point,
        "candidate_value": candidate.leader_value,
    })


def verify_solution(params: MarketParams, candidate, config: OracleConfig) -> OracleResult:
    """Check an equilibrium report's winner against the full-box oracle."""
    return grid_leader_max(params, config, candidate=candidate.winner)


def verify_regime(params: MarketParams, solution, config: OracleConfig) -> OracleResult:
    """Check one regime's optimum against the oracle restricted to ``config.region_filter``."""
    result = grid_leader_max(params, config)
    return _compare(params, result, solution, config, check_region=False)


def follower_grid_check(params: MarketParams, p: float, q: float, steps: int) -> bool:
    if steps < 2:
        return True
    dc = derive(params)
    grid = np.linspace(0.0, dc.p_tilde_mx, steps)
    demand = np.maximum(params.d_bar_j - params.alpha_j * grid + params.eps * params.alpha_i * p, 0.0)
    utility = demand * (grid - q - params.c_j) - params.o_j
    step_slack = float(np.max(np.abs(np.diff(utility))))
    closed = follower_opt_utility(params, p, q)
    tol = 1e-9 * dc.scale
    return closed >= float(utility.max()) - step_slack - tol and closed >= -tol
