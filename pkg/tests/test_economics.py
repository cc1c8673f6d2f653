import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from churn_eval import CostParams, Outcome, clv, contact_cost, customer_profit, offer_cost


@pytest.mark.parametrize("revenue,retention,expected", [
    (100, 0.80, 150.0),
    (80, 0.90, 240.0),
    (150, 0.70, 150.0),
    (100, 0.999, 6000.0),
])
def test_clv(revenue, retention, expected):
    assert clv(revenue, 0.3, retention) == pytest.approx(expected, rel=1e-12)


def test_offer_and_contact():
    assert offer_cost(150, 0.1) == pytest.approx(15)
    assert offer_cost(240, 0.1) == pytest.approx(24)
    assert offer_cost(0, 0.1) == 0
    assert contact_cost(15, 5, 0.3) == 5
    assert contact_cost(24, 5, 0.3) == pytest.approx(7.2)
    assert contact_cost(0, 5, 0.3) == 5


def test_profit_cases():
    tp = customer_profit(True, True, 150, 15, 5)
    assert tp.profit == pytest.approx(130) and tp.outcome is Outcome.TRUE_POSITIVE
    fp = customer_profit(False, True, 240, 24, 7.2)
    assert fp.profit == pytest.approx(-31.2) and fp.outcome is Outcome.FALSE_POSITIVE
    for truth in (True, False):
        na = customer_profit(truth, False, 999, 99, 9)
        assert na.outcome is Outcome.NO_ACTION
        assert na.profit == na.offer_cost == na.contact_cost == 0


def test_cost_params_validation():
    CostParams()
    for bad in ({"margin": 0}, {"margin": 1.5}, {"cpo": 1.0}, {"contact_floor": -1}):
        with pytest.raises(ValueError):
            CostParams(**bad)


money = st.floats(0, 1e5, allow_nan=False)


@given(money, money, money)
def test_tp_minus_fp_is_clv(value, offer, contact):
    tp = customer_profit(True, True, value, offer, contact).profit
    fp = customer_profit(False, True, value, offer, contact).profit
    assert math.isclose(tp - fp, value, rel_tol=1e-12, abs_tol=1e-9)


@given(st.floats(1, 1e4), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_clv_increasing_then_flat(revenue, r1, r2):
    lo, hi = sorted((r1, r2))
    if hi > lo:
        assert clv(revenue, 0.3, hi) > clv(revenue, 0.3, lo)
    assert clv(revenue, 0.3, 0.995) == clv(revenue, 0.3, 0.9999) == clv(revenue, 0.3, 0.995 + hi / 1000)


@given(st.floats(1000, 1e6))
def test_costs_linear_above_floor(value):
    # c1 * cpo * clv >= c0 once clv >= 5 / 0.03
    total = lambda v: offer_cost(v, 0.1) + contact_cost(offer_cost(v, 0.1), 5, 0.3)
    assert math.isclose(total(2 * value), 2 * total(value), rel_tol=1e-12)
