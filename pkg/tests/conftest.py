import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from market import MarketParams, validate_assumptions

settings.register_profile(
    "ci",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
    print_blob=True,
)
settings.load_profile("ci")

BASE_COSTS = dict(c_i=4.0, c_j=4.0, c_s=3.0, o_i=10.0, o_j=10.0, o_s=10.0)


def symmetric(eps=0.5):
    return MarketParams(d_bar_i=100.0, d_bar_j=100.0, alpha_i=0.1, alpha_j=0.1, eps=eps, **BASE_COSTS)


def inferior_in_house(eps=0.5):
    return MarketParams(d_bar_i=10.0, d_bar_j=100.0, alpha_i=0.1, alpha_j=0.001, eps=eps, **BASE_COSTS)


def non_comparable(eps=0.5):
    return MarketParams(d_bar_i=10.0, d_bar_j=100.0, alpha_i=0.001, alpha_j=0.1, eps=eps, **BASE_COSTS)


FAMILIES = {"symmetric": symmetric, "inferior_in_house": inferior_in_house, "non_comparable": non_comparable}


def draw_params(rng, alpha_range=(0.01, 0.2), eps_range=(0.0, 0.95), accept=None):
    """Rejection-sample parameters that satisfy both market assumptions."""
    while True:
        params = MarketParams(
            d_bar_i=rng.uniform(50, 200),
            d_bar_j=rng.uniform(50, 200),
            alpha_i=float(np.exp(rng.uniform(*np.log(alpha_range)))),
            alpha_j=float(np.exp(rng.uniform(*np.log(alpha_range)))),
            eps=rng.uniform(*eps_range),
            c_i=rng.uniform(0, 8),
            c_j=rng.uniform(0, 8),
            c_s=rng.uniform(0, 8),
            o_i=rng.uniform(1, 30),
            o_j=rng.uniform(1, 30),
            o_s=rng.uniform(1, 30),
        )
        if validate_assumptions(params).holds and (accept is None or accept(params)):
            return params


@st.composite
def valid_params(draw, eps=None):
    params = MarketParams(
        d_bar_i=draw(st.floats(20, 300)),
        d_bar_j=draw(st.floats(20, 300)),
        alpha_i=draw(st.floats(0.005, 0.5)),
        alpha_j=draw(st.floats(0.005, 0.5)),
        eps=draw(st.floats(0.0, 1.0)) if eps is None else eps,
        c_i=draw(st.floats(0, 10)),
        c_j=draw(st.floats(0, 10)),
        c_s=draw(st.floats(0, 10)),
        o_i=draw(st.floats(0, 40)),
        o_j=draw(st.floats(0, 40)),
        o_s=draw(st.floats(0, 40)),
    )
    assume(validate_assumptions(params).holds)
    return params


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(FAMILIES))
def family(request):
    return FAMILIES[request.param]
