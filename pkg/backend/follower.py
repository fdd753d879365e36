"""Closed-form best response of the out-house manufacturer."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict

from errors import DomainError
from market import MarketParams, NoOperate, Operate, FollowerAction, derive, follower_utility


class Branch(str, Enum):
    INTERIOR = "Interior"
    SATURATED_AT_MAX = "SaturatedAtMax"
    NO_OPERATE = "NoOperate"


class BestResponse(BaseModel):
    model_config = ConfigDict(frozen=True)

    action: FollowerAction
    theta_at_p: float
    branch: Branch

    @property
    def operates(self):
        return isinstance(self.action, Operate)


def theta_first_branch(params: MarketParams, p):
    root = np.sqrt(params.alpha_j * params.o_j)
    value = (params.d_bar_j + params.eps * params.alpha_i * np.asarray(p, dtype=float)
             - params.alpha_j * params.c_j - 2 * root) / params.alpha_j
    return value[()]


def theta_second_branch(params: MarketParams, p):
    p = np.asarray(p, dtype=float)
    base = (params.d_bar_j + params.eps * params.d_bar_i - params.alpha_j * params.c_j) / params.alpha_j
    if params.o_j == 0:
        return (base + np.zeros_like(p))[()]
    denominator = params.eps * (params.alpha_i * p - params.d_bar_i)
    if np.any(denominator <= 0):
        raise DomainError(f"second branch of theta is undefined where eps * (alpha_i * p - d_bar_i) <= 0, "
                          f"i.e. p <= {params.d_bar_i / params.alpha_i!r} or eps = 0")
    return (base - params.o_j / denominator)[()]


def theta(params: MarketParams, p):
    """Largest wholesale price at which the follower still operates.

    Accepts a scalar or an array of retail prices. The first branch applies up
    to and including the switching price.
    """
    p = np.asarray(p, dtype=float)
    flat = np.atleast_1d(p)
    first = flat <= derive(params).p_sw
    value = np.array(theta_first_branch(params, flat), dtype=float)
    if not first.all():
        value[~first] = theta_second_branch(params, flat[~first])
    return value.reshape(p.shape)[()]


def best_response_price(params: MarketParams, p, q):
    """Vectorised best response.

    Returns ``(p_tilde, operates, saturated)`` arrays; ``p_tilde`` is zero where
    the follower stays out.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p_tilde_mx = derive(params).p_tilde_mx
    stationary = (params.d_bar_j + params.eps * params.alpha_i * p) / (2 * params.alpha_j) + (params.c_j + q) / 2
    saturated = stationary >= p_tilde_mx
    operates = q <= theta(params, p)
    price = np.where(operates, np.minimum(stationary, p_tilde_mx), 0.0)
    return price, operates, saturated & operates


def best_response(params: MarketParams, p, q) -> BestResponse:
    price, operates, saturated = best_response_price(params, p, q)
    theta_at_p = float(theta(params, p))
    if not operates:
        return BestResponse(action=NoOperate(), theta_at_p=theta_at_p, branch=Branch.NO_OPERATE)
    branch = Branch.SATURATED_AT_MAX if saturated else Branch.INTERIOR
    return BestResponse(action=Operate(p_tilde=float(price)), theta_at_p=theta_at_p, branch=branch)


def follower_opt_utility(params: MarketParams, p, q) -> float:
    return follower_utility(params, p, q, best_response(params, p, q).action)
