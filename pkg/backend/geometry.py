"""Boundary curves and region membership of the co-existence region.

Everything here is affine in (p, q) except theta. Functions accept scalars or
numpy arrays unless noted.
"""

import math
from enum import Enum
from typing import NamedTuple

import numpy as np

from errors import EmptySection, NotInvertible
from follower import theta, theta_first_branch
from market import MarketParams, derive


class RegionTag(str, Enum):
    FCO_PLUS = "FcoPlus"
    FCO_LOSS = "FcoLoss"
    FCO_SATURATED = "FcoSaturated"
    OUTSIDE_FCO = "OutsideFco"


REGION_ORDER = (RegionTag.FCO_PLUS, RegionTag.FCO_LOSS, RegionTag.FCO_SATURATED, RegionTag.OUTSIDE_FCO)


class HalfPlane(NamedTuple):
    """``a_p * p + a_q * q <= b``"""

    name: str
    a_p: float
    a_q: float
    b: float

    def slack(self, p, q):
        return self.b - self.a_p * p - self.a_q * q


def phi(params: MarketParams, p):
    p = np.asarray(p, dtype=float)
    value = (params.d_bar_j + 2 * params.eps * params.d_bar_i - params.eps * params.alpha_i * p
             - params.alpha_j * params.c_j) / params.alpha_j
    return value[()]


def phi_inv(params: MarketParams, q):
    denominator = params.eps * params.alpha_i
    if denominator == 0:
        raise NotInvertible("phi does not depend on p when eps * alpha_i is 0")
    q = np.asarray(q, dtype=float)
    value = (params.d_bar_j + 2 * params.eps * params.d_bar_i - params.alpha_j * params.c_j
             - params.alpha_j * q) / denominator
    return value[()]


def psi(params: MarketParams, q):
    q = np.asarray(q, dtype=float)
    eps = params.eps
    value = (2 * params.d_bar_i + eps * params.d_bar_j + eps * params.alpha_j * (params.c_j + q)) \
        / ((2 - eps**2) * params.alpha_i)
    return value[()]


def psi_inv(params: MarketParams, p):
    eps = params.eps
    denominator = eps * params.alpha_j
    if denominator == 0:
        raise NotInvertible("psi does not depend on q when eps * alpha_j is 0")
    p = np.asarray(p, dtype=float)
    value = ((2 - eps**2) * params.alpha_i * p - 2 * params.d_bar_i - eps * params.d_bar_j
             - eps * params.alpha_j * params.c_j) / denominator
    return value[()]


def region_codes(params: MarketParams, p, q):
    """Index into REGION_ORDER for every (p, q); closed F+ wins ties."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    outside = q > theta(params, p)
    plus = ~outside & (q <= phi(params, p)) & (p <= np.minimum(derive(params).p_mx, psi(params, q)))
    loss = ~outside & ~plus & (p > psi(params, q))
    return np.select([plus, loss, outside], [0, 1, 3], default=2)


def region_of(params: MarketParams, p: float, q: float) -> RegionTag:
    return REGION_ORDER[int(region_codes(params, p, q))]


def q_bar(params: MarketParams, p):
    return np.minimum(theta(params, p), phi(params, p))[()]


def q_bar_branch_form(params: MarketParams, p):
    """q_bar written as theta up to the switching price and phi after it."""
    p = np.asarray(p, dtype=float)
    return np.where(p <= derive(params).p_sw, theta(params, p), phi(params, p))[()]


def l_bound(params: MarketParams, p):
    if params.eps * params.alpha_j == 0:
        # psi is flat: the whole section is open below psi(0) and empty above
        return np.where(np.asarray(p) <= derive(params).psi_0, 0.0, math.inf)[()]
    return np.maximum(0.0, psi_inv(params, p))[()]


def p_bar(params: MarketParams) -> float:
    return derive(params).p_bar


def h(params: MarketParams, p):
    dc = derive(params)
    return (-(dc.w2 * np.asarray(p, dtype=float) + dc.w5) / (2 * dc.w3))[()]


def q_star_section(params: MarketParams, p: float) -> float:
    lower = float(l_bound(params, p))
    upper = float(q_bar(params, p))
    if upper < lower:
        raise EmptySection(p, lower, upper)
    return max(lower, min(float(h(params, p)), upper))


def fco_plus_halfplanes(params: MarketParams):
    """The closed mutual-profit region as six half-planes.

    Below phi the theta constraint is always carried by its first branch, so
    F+ is a convex polygon.
    """
    dc = derive(params)
    eps, a_i, a_j = params.eps, params.alpha_i, params.alpha_j
    psi_slope = eps * a_j / ((2 - eps**2) * a_i)
    cross = eps * a_i / a_j
    return [
        HalfPlane("p>=0", -1.0, 0.0, 0.0),
        HalfPlane("q>=0", 0.0, -1.0, 0.0),
        HalfPlane("L4", 1.0, 0.0, dc.p_mx),
        HalfPlane("L2", 1.0, -psi_slope, dc.psi_0),
        HalfPlane("L1", cross, 1.0, float(phi(params, 0.0))),
        HalfPlane("L3", -cross, 1.0, float(theta_first_branch(params, 0.0))),
    ]
