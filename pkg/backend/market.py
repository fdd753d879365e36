"""Market parameters, assumption checks, demands and raw utilities.

The coalition (supplier plus in-house manufacturer) announces a retail price
``p`` and a wholesale price ``q``; the out-house manufacturer answers with its
own retail price ``p_tilde`` or declines to operate.
"""

import math
from functools import lru_cache
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class MarketParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    d_bar_i: float = Field(ge=0)
    d_bar_j: float = Field(ge=0)
    alpha_i: float = Field(gt=0)
    alpha_j: float = Field(gt=0)
    eps: float = Field(ge=0, le=1)
    c_i: float = Field(ge=0)
    c_j: float = Field(ge=0)
    c_s: float = Field(ge=0)
    o_i: float = Field(ge=0)
    o_j: float = Field(ge=0)
    o_s: float = Field(ge=0)

    def with_eps(self, eps):
        return MarketParams(**{**self.model_dump(), "eps": eps})


class Operate(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["operate"] = "operate"
    p_tilde: float = Field(ge=0)


class NoOperate(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["no_operate"] = "no_operate"


FollowerAction = Annotated[Union[Operate, NoOperate], Field(discriminator="kind")]


class DerivedConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_mx: float
    p_tilde_mx: float
    p_sw: float
    w1: float
    w2: float
    w3: float
    w4: float
    w5: float
    w6: float
    psi_0: float
    phi_root: float
    p_bar: float
    l_mx: float
    r_mx: float
    scale: float
    price_tol: float


class UtilityBreakdown(BaseModel):
    demand_i: float = Field(ge=0)
    demand_j: float = Field(ge=0)
    retail_margin_revenue: float
    wholesale_revenue: float
    leader_utility: float
    follower_utility: float


class AssumptionReport(BaseModel):
    """Slacks are positive when the inequality holds."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    a1_holds: bool
    a2_holds: bool
    a1_in_house_slack: float
    a1_out_house_slack: float
    a2_slack: float

    @property
    def holds(self):
        return self.a1_holds and self.a2_holds

    def failures(self):
        failing = []
        if self.a1_in_house_slack < 0:
            failing.append(("A.1 in-house", self.a1_in_house_slack))
        if self.a1_out_house_slack < 0:
            failing.append(("A.1 out-house", self.a1_out_house_slack))
        if not self.a2_holds:
            failing.append(("A.2", self.a2_slack))
        return failing


@lru_cache(maxsize=512)
def derive(params: MarketParams) -> DerivedConstants:
    d_i, d_j = params.d_bar_i, params.d_bar_j
    a_i, a_j, eps = params.alpha_i, params.alpha_j, params.eps
    c_in = params.c_i + params.c_s
    root_j = math.sqrt(a_j * params.o_j)

    p_mx = (d_i + eps * d_j) / a_i
    p_tilde_mx = (d_j + eps * d_i) / a_j
    cross_i = eps * a_i
    p_sw = d_i / a_i + root_j / cross_i if cross_i > 0 else math.inf

    w1 = -a_i * (1 - eps**2 / 2)
    w2 = eps * (a_i + a_j) / 2
    w3 = -a_j / 2
    w4 = (2 * d_i + eps * d_j + eps * a_j * params.c_j - eps * a_i * params.c_s
          + 2 * a_i * (1 - eps**2 / 2) * c_in) / 2
    w5 = -eps * a_j * c_in / 2 + (d_j - a_j * params.c_j + a_j * params.c_s) / 2
    # fixed costs folded in so the quadratic form equals the product form exactly
    w6 = (-(d_i + eps * (d_j + a_j * params.c_j) / 2) * c_in
          - (d_j - a_j * params.c_j) / 2 * params.c_s - params.o_i - params.o_s)

    psi_0 = (2 * d_i + eps * d_j + eps * a_j * params.c_j) / ((2 - eps**2) * a_i)
    phi_root = (d_j + 2 * eps * d_i - a_j * params.c_j) / cross_i if cross_i > 0 else math.inf
    p_bar = min(psi_0, p_mx, phi_root)

    if eps > 0:
        l_mx = max((-eps * d_i + (1 - eps**2) * d_j - a_j * params.c_j) / a_j, 0.0)
    else:
        l_mx = 0.0
    if p_mx <= p_sw:
        r_mx = (d_j * (1 + eps**2) + eps * d_i - a_j * params.c_j - 2 * root_j) / a_j
    else:
        r_mx = (d_j * (1 - eps**2) + eps * d_i - a_j * params.c_j) / a_j

    scale = max(1.0, params.o_i + params.o_s, d_i * p_mx, d_j * p_tilde_mx)
    price_tol = 1e-9 * max(1.0, p_mx, p_tilde_mx)
    return DerivedConstants(
        p_mx=p_mx, p_tilde_mx=p_tilde_mx, p_sw=p_sw,
        w1=w1, w2=w2, w3=w3, w4=w4, w5=w5, w6=w6,
        psi_0=psi_0, phi_root=phi_root, p_bar=p_bar,
        l_mx=l_mx, r_mx=r_mx, scale=scale, price_tol=price_tol,
    )


def validate_assumptions(params: MarketParams) -> AssumptionReport:
    a_i, a_j = params.alpha_i, params.alpha_j
    in_house_bound = a_i * (params.c_s + params.c_i) + 2 * math.sqrt(a_i * (params.o_s + params.o_i))
    out_house_bound = a_j * (params.c_s + params.c_j) + 2 * max(
        math.sqrt(2 * a_j * (params.o_s + params.o_i)), math.sqrt(a_j * params.o_j)
    )
    a2_denominator = a_j * params.c_i
    if a2_denominator == 0:
        a2_slack = math.inf
    else:
        a2_slack = 2 * math.sqrt(a_j * params.o_j) / a2_denominator - params.eps

    in_slack = params.d_bar_i - in_house_bound
    out_slack = params.d_bar_j - out_house_bound
    return AssumptionReport(
        a1_holds=in_slack >= 0 and out_slack >= 0,
        a2_holds=a2_slack >= 0,
        a1_in_house_slack=in_slack,
        a1_out_house_slack=out_slack,
        a2_slack=a2_slack,
    )


def _follower_price(follower):
    if isinstance(follower, Operate):
        return follower.p_tilde, True
    return 0.0, False


def demand_in_house(params: MarketParams, p, follower) -> float:
    p_tilde, operates = _follower_price(follower)
    spill = params.eps * params.alpha_j * p_tilde if operates else 0.0
    return max(params.d_bar_i - params.alpha_i * p + spill, 0.0)


def demand_out_house(params: MarketParams, p, p_tilde) -> float:
    return max(params.d_bar_j - params.alpha_j * p_tilde + params.eps * params.alpha_i * p, 0.0)


def coalition_utility(params: MarketParams, p, q, p_tilde, operates):
    """Vectorised U_V over arrays of announcements and follower answers.

    ``operates`` is a boolean array; where it is false the follower's price is
    ignored and its demand is zero. The coalition always pays o_i + o_s.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p_tilde = np.where(operates, p_tilde, 0.0)
    demand_i = np.maximum(params.d_bar_i - params.alpha_i * p + params.eps * params.alpha_j * p_tilde, 0.0)
    demand_j = np.where(
        operates,
        np.maximum(params.d_bar_j - params.alpha_j * p_tilde + params.eps * params.alpha_i * p, 0.0),
        0.0,
    )
    value = (demand_i * (p - params.c_i - params.c_s) + demand_j * (q - params.c_s)
             - params.o_i - params.o_s)
    return value[()]


def utility_breakdown(params: MarketParams, p, q, follower, in_house_open=True) -> UtilityBreakdown:
    p_tilde, operates = _follower_price(follower)
    demand_i = demand_in_house(params, p, follower) if in_house_open else 0.0
    demand_j = demand_out_house(params, p, p_tilde) if operates else 0.0
    retail = demand_i * (p - params.c_i - params.c_s)
    wholesale = demand_j * (q - params.c_s)
    leader = retail + wholesale - params.o_i - params.o_s
    follower_value = demand_j * (p_tilde - q - params.c_j) - params.o_j if operates else 0.0
    return UtilityBreakdown(
        demand_i=demand_i,
        demand_j=demand_j,
        retail_margin_revenue=retail,
        wholesale_revenue=wholesale,
        leader_utility=leader,
        follower_utility=follower_value,
    )


def leader_utility(params: MarketParams, p, q, follower, in_house_open=True, coalition_operates=True) -> float:
    if not coalition_operates:
        return 0.0
    return utility_breakdown(params, p, q, follower, in_house_open).leader_utility


def follower_utility(params: MarketParams, p, q, follower, coalition_operates=True) -> float:
    p_tilde, operates = _follower_price(follower)
    if not operates:
        return 0.0
    if not coalition_operates:
        # no raw material to buy, the fixed cost is still sunk
        return -params.o_j
    return demand_out_house(params, p, p_tilde) * (p_tilde - q - params.c_j) - params.o_j
