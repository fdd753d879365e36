"""Comparison predicates between the regimes.

These are sign tests on printed parameter expressions; the ones that need a
full solve live in ``sweep``.
"""

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict

from market import MarketParams


class LemmaFlags(BaseModel):
    model_config = ConfigDict(frozen=True)

    lemma1_holds: bool
    loss_regime_empty: bool
    lemma2_condition_holds: bool
    epsilon_bar_estimate: Optional[float] = None


def lemma1_expression(params: MarketParams) -> float:
    eps2 = params.eps**2
    a_i, a_j = params.alpha_i, params.alpha_j
    return (8 - 6 * eps2) * a_i * a_j - eps2 * (a_i**2 + a_j**2)


def lemma1_condition(params: MarketParams) -> bool:
    """True when the objective is not concave, so both-profitable cannot win in the interior."""
    return lemma1_expression(params) < 0


def lemma2_condition(params: MarketParams) -> bool:
    """True when large-eps optimum is predicted at (p_mx, h(p_mx)), false for (p_mx, theta(p_mx))."""
    a_i, a_j = params.alpha_i, params.alpha_j
    radicand = params.d_bar_j**2 - a_j * params.o_j
    if radicand < 0:
        return False
    lhs = (a_j - a_i) * params.d_bar_i + (2 * a_i + a_j) * params.d_bar_j + a_i * a_j * (params.c_j - params.c_i)
    return lhs < 2 * math.sqrt(2) * a_i * math.sqrt(radicand)


def loss_gap_numerator(params: MarketParams) -> float:
    """Numerator of psi(0) - p_mx; its denominator alpha_i * (2 - eps^2) is positive."""
    eps = params.eps
    return eps**2 * params.d_bar_i - eps * (1 - eps**2) * params.d_bar_j + eps * params.alpha_j * params.c_j


def loss_regime_empty(params: MarketParams) -> bool:
    return loss_gap_numerator(params) >= 0


def lemma_flags(params: MarketParams, epsilon_bar=None) -> LemmaFlags:
    return LemmaFlags(
        lemma1_holds=lemma1_condition(params),
        loss_regime_empty=loss_regime_empty(params),
        lemma2_condition_holds=lemma2_condition(params),
        epsilon_bar_estimate=epsilon_bar,
    )
