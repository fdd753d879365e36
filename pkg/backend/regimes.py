"""Closed-form optimisers for the four co-existence regimes and their aggregation.

The coalition picks the best of:

* both units profitable, at the stationary point of the quadratic objective
  inside the mutual-profit region;
* in-house at loss, pricing the in-house product out at ``p_mx``;
* maximum price, on the line ``p = p_mx`` inside the mutual-profit region;
* operate at par, on the follower's zero-profit frontier ``q = theta(p)``.
"""

import logging
import math
from enum import Enum
from typing import Any, NamedTuple, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from analysis import LemmaFlags, lemma_flags, loss_regime_empty
from errors import AssumptionViolated, InternalInconsistency, SingularHessian
from follower import BestResponse, best_response, theta, theta_first_branch
from geometry import fco_plus_halfplanes, h, phi, psi
from market import AssumptionReport, MarketParams, derive, follower_utility, leader_utility, validate_assumptions

logger = logging.getLogger(__name__)


class RegimeKind(str, Enum):
    BOTH_PROFITABLE = "BothProfitable"
    IN_HOUSE_LOSS = "InHouseLoss"
    AT_PAR = "AtPar"
    MAX_PRICE = "MaxPrice"

    @property
    def code(self):
        return REGIME_CODES[self]


# numeric codes used in sweep output
REGIME_CODES = {
    RegimeKind.BOTH_PROFITABLE: 1,
    RegimeKind.IN_HOUSE_LOSS: 2,
    RegimeKind.AT_PAR: 3,
    RegimeKind.MAX_PRICE: 4,
}

TIE_ORDER = (RegimeKind.BOTH_PROFITABLE, RegimeKind.AT_PAR, RegimeKind.MAX_PRICE, RegimeKind.IN_HOUSE_LOSS)


class Boundary(str, Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"
    INTERIOR = "Interior"


class RegimeSolution(BaseModel):
    model_config = ConfigDict(frozen=True)

    regime: RegimeKind
    p_opt: float
    q_opt: float
    follower: BestResponse
    leader_value: float
    follower_value: float
    active_boundary: Optional[Boundary] = None


class EmptyRegime(BaseModel):
    """A regime that is empty or gated out, with the reason.

    ``value`` carries the regime's best value when it exists but is excluded by
    a gate (a boundary optimum of the mutual-profit region).
    """

    model_config = ConfigDict(frozen=True)

    regime: RegimeKind
    reason: str
    value: Optional[float] = None


class EquilibriumReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: MarketParams
    assumptions: AssumptionReport
    solutions: list[RegimeSolution]
    winner: RegimeSolution
    empty_regimes: list[EmptyRegime]
    lemma_flags: LemmaFlags
    # an oracle.OracleResult once verified
    oracle_check: Optional[Any] = None


class StationaryPoint(NamedTuple):
    p_co_star: float
    q_co_star: float
    hessian_negdef: bool


def unconstrained_objective(params: MarketParams, p, q):
    dc = derive(params)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    value = dc.w1 * p**2 + dc.w2 * p * q + dc.w3 * q**2 + dc.w4 * p + dc.w5 * q + dc.w6
    return value[()]


def objective_gradient(params: MarketParams, p, q):
    dc = derive(params)
    return 2 * dc.w1 * p + dc.w2 * q + dc.w4, dc.w2 * p + 2 * dc.w3 * q + dc.w5


def solve_unconstrained(params: MarketParams) -> StationaryPoint:
    dc = derive(params)
    det = 4 * dc.w1 * dc.w3 - dc.w2**2
    if abs(det) < 1e-12 * max(abs(4 * dc.w1 * dc.w3), dc.w2**2):
        raise SingularHessian(det)
    p_star = -(2 * dc.w3 * dc.w4 - dc.w2 * dc.w5) / det
    q_star = -(dc.w2 * p_star + dc.w5) / (2 * dc.w3)
    return StationaryPoint(p_star, q_star, det > 0)


def _solution(params, regime, p, q, boundary=None, leader_value=None):
    response = best_response(params, p, q)
    if leader_value is None:
        leader_value = leader_utility(params, p, q, response.action)
    return RegimeSolution(
        regime=regime,
        p_opt=p,
        q_opt=q,
        follower=response,
        leader_value=leader_value,
        follower_value=follower_utility(params, p, q, response.action),
        active_boundary=boundary,
    )


def at_par_objective(params: MarketParams, p: float) -> float:
    """U_V along the follower's zero-profit frontier."""
    q = float(theta(params, p))
    return leader_utility(params, p, q, best_response(params, p, q).action)


def _at_par_first_branch(params: MarketParams, lower: float, upper: float) -> float:
    """Best p on q = theta_1(p) within [lower, upper].

    The closed form maximises the unclamped quadratic; where in-house demand
    hits zero the true utility departs from it, so the right end is compared too.
    """
    eps, a_i, a_j = params.eps, params.alpha_i, params.alpha_j
    c_in = params.c_i + params.c_s
    root = math.sqrt(a_j * params.o_j)
    curvature = a_i * (1 - eps**2)
    drift = params.d_bar_i + eps * params.d_bar_j - eps * root + eps * a_i * root / a_j
    if curvature > 1e-15 * a_i:
        p_star = min(max(c_in / 2 + drift / (2 * curvature), lower), upper)
    else:
        p_star = upper if drift >= 0 else lower
    if upper > p_star and at_par_objective(params, upper) > at_par_objective(params, p_star):
        return upper
    return p_star


def _at_par_second_branch(params: MarketParams) -> float:
    dc = derive(params)
    eps, a_i, a_j = params.eps, params.alpha_i, params.alpha_j
    k = params.d_bar_j + eps * params.d_bar_i - a_j * params.c_j - a_j * params.c_s
    stationary = (params.d_bar_i * (1 + eps**2) + eps * params.d_bar_j + a_i * (params.c_i + params.c_s)
                  + eps * a_i * k / a_j) / (2 * a_i)
    return max(dc.p_sw, min(dc.p_mx, stationary))


def solve_at_par_saturated(params: MarketParams) -> Union[RegimeSolution, EmptyRegime]:
    """At-par optimum over p in [p_sw, p_mx], where theta lies above phi."""
    dc = derive(params)
    if dc.p_sw > dc.p_mx:
        return EmptyRegime(regime=RegimeKind.AT_PAR, reason=f"p_sw={dc.p_sw!r} > p_mx={dc.p_mx!r}")
    p = _at_par_second_branch(params)
    return _solution(params, RegimeKind.AT_PAR, p, float(theta(params, p)))


def solve_at_par(params: MarketParams) -> RegimeSolution:
    dc = derive(params)
    p_first = _at_par_first_branch(params, 0.0, min(dc.p_sw, dc.p_mx))
    best = _solution(params, RegimeKind.AT_PAR, p_first, float(theta(params, p_first)), Boundary.L3)
    second = solve_at_par_saturated(params)
    if isinstance(second, EmptyRegime):
        logger.debug("second at-par branch skipped: %s", second.reason)
    elif second.leader_value > best.leader_value:
        best = second
    return best


def U_ls(params: MarketParams, q: float) -> float:
    """Coalition utility at p = p_mx with the in-house demand priced out."""
    eps = params.eps
    fixed = params.o_i + params.o_s
    if q <= float(phi(params, derive(params).p_mx)):
        demand_j = (params.d_bar_j * (1 + eps**2) + eps * params.d_bar_i - params.alpha_j * (q + params.c_j)) / 2
    else:
        demand_j = eps**2 * params.d_bar_j
    return demand_j * (q - params.c_s) - fixed


def solve_loss(params: MarketParams) -> Union[RegimeSolution, EmptyRegime]:
    dc = derive(params)
    if loss_regime_empty(params):
        return EmptyRegime(regime=RegimeKind.IN_HOUSE_LOSS, reason=f"psi(0)={dc.psi_0!r} >= p_mx={dc.p_mx!r}")
    eps = params.eps
    q_tilde = (params.d_bar_j * (1 + eps**2) + eps * params.d_bar_i - params.alpha_j * params.c_j) \
        / (2 * params.alpha_j) + params.c_s / 2
    # l_mx is max(0, psi_inv(p_mx)) with the eps factor cancelled
    u_ls = min(dc.l_mx, float(theta(params, dc.p_mx)))
    if q_tilde <= min(u_ls, float(phi(params, dc.p_mx))):
        q = q_tilde
    else:
        q = u_ls
    return _solution(params, RegimeKind.IN_HOUSE_LOSS, dc.p_mx, q, leader_value=U_ls(params, q))


def solve_max_price(params: MarketParams) -> Union[RegimeSolution, EmptyRegime]:
    dc = derive(params)
    if dc.l_mx >= dc.r_mx:
        return EmptyRegime(regime=RegimeKind.MAX_PRICE, reason=f"l_mx={dc.l_mx!r} >= r_mx={dc.r_mx!r}")
    q = max(dc.l_mx, min(dc.r_mx, float(h(params, dc.p_mx))))
    return _solution(params, RegimeKind.MAX_PRICE, dc.p_mx, q, Boundary.L4)


def _is_interior(params, p, q):
    tol = 1e-9 * derive(params).scale
    for plane in fco_plus_halfplanes(params):
        if plane.slack(p, q) / math.hypot(plane.a_p, plane.a_q) <= tol:
            return False
    return True


def _segment(planes, index, tol):
    """Parametrise ``planes[index]`` as x0 + t*d and clip t to the others."""
    plane = planes[index]
    norm2 = plane.a_p**2 + plane.a_q**2
    x0 = np.array([plane.a_p * plane.b / norm2, plane.a_q * plane.b / norm2])
    d = np.array([-plane.a_q, plane.a_p])
    lower, upper = -math.inf, math.inf
    for other in planes:
        if other is plane:
            continue
        rate = other.a_p * d[0] + other.a_q * d[1]
        room = other.slack(*x0)
        if abs(rate) <= 1e-15 * math.hypot(other.a_p, other.a_q) * math.sqrt(norm2):
            if room < -tol:
                return None
            continue
        if rate > 0:
            upper = min(upper, room / rate)
        else:
            lower = max(lower, room / rate)
    if lower > upper:
        return None
    return x0, d, lower, upper


def _snap(params, name, p, q):
    dc = derive(params)
    if name == "L4":
        return dc.p_mx, q
    if name == "L1":
        return p, float(phi(params, p))
    if name == "L2":
        return float(psi(params, q)), q
    return p, float(theta_first_branch(params, p))


def _best_on_line(params, planes, name):
    index = [plane.name for plane in planes].index(name)
    segment = _segment(planes, index, derive(params).price_tol)
    if segment is None:
        return None
    x0, d, lower, upper = segment
    if name == "L3":
        ends = sorted((x0[0] + lower * d[0], x0[0] + upper * d[0]))
        p = _at_par_first_branch(params, max(ends[0], 0.0), ends[1])
        return _solution(params, RegimeKind.BOTH_PROFITABLE, p, float(theta_first_branch(params, p)), Boundary.L3)

    dc = derive(params)
    grad = objective_gradient(params, *x0)
    slope = grad[0] * d[0] + grad[1] * d[1]
    curvature = dc.w1 * d[0] ** 2 + dc.w2 * d[0] * d[1] + dc.w3 * d[1] ** 2
    candidates = [lower, upper]
    if curvature < 0:
        candidates.append(min(max(-slope / (2 * curvature), lower), upper))
    best = None
    for t in candidates:
        p, q = _snap(params, name, *(x0 + t * d))
        candidate = _solution(params, RegimeKind.BOTH_PROFITABLE, p, q, Boundary(name))
        if best is None or candidate.leader_value > best.leader_value:
            best = candidate
    return best


def solve_both_profitable(params: MarketParams) -> Union[RegimeSolution, EmptyRegime]:
    dc = derive(params)
    if dc.p_bar <= 0:
        return EmptyRegime(regime=RegimeKind.BOTH_PROFITABLE, reason=f"mutual-profit region is empty (p_bar={dc.p_bar!r})")
    try:
        stationary = solve_unconstrained(params)
    except SingularHessian as exc:
        logger.debug("falling back to boundary search: %s", exc)
        stationary = None
    if stationary is not None and stationary.hessian_negdef \
            and _is_interior(params, stationary.p_co_star, stationary.q_co_star):
        return _solution(params, RegimeKind.BOTH_PROFITABLE, stationary.p_co_star, stationary.q_co_star,
                         Boundary.INTERIOR)

    planes = fco_plus_halfplanes(params)
    best = None
    for name in ("L1", "L2", "L3", "L4"):
        candidate = _best_on_line(params, planes, name)
        if candidate is not None and (best is None or candidate.leader_value > best.leader_value):
            best = candidate
    if best is None:
        return EmptyRegime(regime=RegimeKind.BOTH_PROFITABLE, reason="no boundary segment of the mutual-profit region")
    return best


def regime_slack(params: MarketParams, solution: RegimeSolution) -> float:
    """Smallest slack of the solution's defining inequalities, in currency."""
    dc = derive(params)
    p, q = solution.p_opt, solution.q_opt
    theta_at_p = float(theta(params, p))
    if solution.regime is RegimeKind.BOTH_PROFITABLE:
        return min(plane.slack(p, q) / math.hypot(plane.a_p, plane.a_q) for plane in fco_plus_halfplanes(params))
    if solution.regime is RegimeKind.IN_HOUSE_LOSS:
        return min(-abs(p - dc.p_mx), p - float(psi(params, q)), theta_at_p - q, q)
    if solution.regime is RegimeKind.MAX_PRICE:
        return min(-abs(p - dc.p_mx), q - dc.l_mx, dc.r_mx - q)
    return min(-abs(q - theta_at_p), p, dc.p_mx - p)


def solve_coexistence(params: MarketParams) -> EquilibriumReport:
    assumptions = validate_assumptions(params)
    if not assumptions.holds:
        raise AssumptionViolated(assumptions)

    dc = derive(params)
    solvers = {
        RegimeKind.BOTH_PROFITABLE: solve_both_profitable,
        RegimeKind.AT_PAR: solve_at_par,
        RegimeKind.MAX_PRICE: solve_max_price,
        RegimeKind.IN_HOUSE_LOSS: solve_loss,
    }
    solutions, empty = [], []
    for regime in TIE_ORDER:
        result = solvers[regime](params)
        if isinstance(result, EmptyRegime):
            logger.debug("%s empty: %s", regime.value, result.reason)
            empty.append(result)
            continue
        if regime is RegimeKind.BOTH_PROFITABLE and result.active_boundary is not Boundary.INTERIOR:
            reason = f"stationary point not interior; best on {result.active_boundary.value} is covered by another regime"
            logger.debug("%s gated: %s", regime.value, reason)
            empty.append(EmptyRegime(regime=regime, reason=reason, value=result.leader_value))
            continue
        slack = regime_slack(params, result)
        if slack < -dc.price_tol:
            raise InternalInconsistency(regime.value, slack)
        solutions.append(result)

    winner = None
    for solution in solutions:
        if winner is None or solution.leader_value > winner.leader_value:
            winner = solution
    logger.info("eps=%r winner %s at (%r, %r)", params.eps, winner.regime.value, winner.p_opt, winner.q_opt)
    return EquilibriumReport(
        params=params,
        assumptions=assumptions,
        solutions=solutions,
        winner=winner,
        empty_regimes=empty,
        lemma_flags=lemma_flags(params),
    )
