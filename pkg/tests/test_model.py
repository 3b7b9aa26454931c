from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratchet_ruin import (
    Affine,
    AgentState,
    DomainError,
    InvalidParams,
    MarketParams,
    Power,
    Regime,
    classify_regime,
    derive_constants,
    safe_level,
)

# reference values from a 40-digit evaluation of the quadratic roots (mpmath)
GAMMA = 2.031130716501647
B1 = 1.969809146402635
B2 = -0.649809146402635


@st.composite
def markets(draw):
    r = draw(st.floats(0.005, 0.15))
    excess = draw(st.floats(0.005, 0.3))
    sigma = draw(st.floats(0.05, 0.8))
    lam = draw(st.floats(0.005, 0.3))
    return MarketParams(r=r, mu=r + excess, sigma=sigma, lam=lam)


def test_baseline_constants(baseline):
    k = derive_constants(baseline)
    assert k.delta == 0.03125
    assert k.gamma == pytest.approx(GAMMA, rel=1e-14)
    assert k.B1 == pytest.approx(B1, rel=1e-14)
    assert k.B2 == pytest.approx(B2, rel=1e-13)


@given(markets())
@settings(max_examples=200, deadline=None)
def test_roots_satisfy_their_quadratics(p):
    k = derive_constants(p)
    g = k.gamma
    assert g > 1
    assert k.B1 > 1 > 0 > k.B2
    scale = p.r * g * g + (p.r + p.lam + k.delta) * g + p.lam
    assert abs(p.r * g * g - (p.r + p.lam + k.delta) * g + p.lam) <= 1e-13 * scale
    for b in (k.B1, k.B2):
        scale = k.delta * b * b + abs(p.r - p.lam + k.delta) * abs(b) + p.lam
        assert abs(k.delta * b * b - (p.r - p.lam + k.delta) * b - p.lam) <= 1e-13 * scale


@given(markets())
@settings(max_examples=200, deadline=None)
def test_b1_is_gamma_over_gamma_minus_one(p):
    k = derive_constants(p)
    assert k.B1 == pytest.approx(k.gamma / (k.gamma - 1.0), rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(r=0.05, mu=0.05, sigma=0.2, lam=0.04),
        dict(r=0.05, mu=0.04, sigma=0.2, lam=0.04),
        dict(r=0.0, mu=0.1, sigma=0.2, lam=0.04),
        dict(r=0.05, mu=0.1, sigma=0.0, lam=0.04),
        dict(r=0.05, mu=0.1, sigma=0.2, lam=0.0),
        dict(r=0.05, mu=math.nan, sigma=0.2, lam=0.04),
    ],
)
def test_invalid_market_rejected(kwargs):
    with pytest.raises(InvalidParams):
        MarketParams(**kwargs)


def test_invalid_consumption_rejected():
    with pytest.raises(InvalidParams):
        Affine(slope=-0.01, intercept=1.0)
    with pytest.raises(InvalidParams):
        Affine(slope=0.0, intercept=0.0)
    with pytest.raises(InvalidParams):
        Power(scale=0.0, exponent=0.5)
    with pytest.raises(InvalidParams):
        Affine(0.0, 4.0).require_increasing()


def test_state_validation():
    with pytest.raises(DomainError):
        AgentState(w=101.0, m=100.0)
    with pytest.raises(DomainError):
        AgentState(w=1.0, m=0.0)


def test_safe_level_examples():
    assert safe_level(Affine(0.04), 100.0, 0.05) == pytest.approx(80.0)
    assert safe_level(Affine(0.06), 100.0, 0.05) == pytest.approx(120.0)
    assert safe_level(Power(1.0, 1.0), 7.0, 0.05) == pytest.approx(7.0 / 0.05)


@pytest.mark.parametrize(
    "consumption, w, m, expected",
    [
        (Affine(0.04), -1.0, 100.0, Regime.RUINED),
        (Affine(0.04), 0.0, 100.0, Regime.RUINED),
        (Affine(0.04), 40.0, 100.0, Regime.FIXED_MAX_BELOW_SAFE),
        (Affine(0.04), 80.0, 100.0, Regime.SAFE_LEVEL),
        (Affine(0.06), 50.0, 100.0, Regime.RATCHET_BLOCKED),
        (Power(2.0, 1.5), 5.0, 10.0, Regime.RATCHET_BLOCKED),
        (Power(0.5, 0.5), 15.0, 30.0, Regime.RATCHET_ACTIVE),
        (Power(0.5, 0.5), 15.0, 150.0, Regime.FIXED_MAX_BELOW_SAFE),
    ],
)
def test_regime_routing(baseline, consumption, w, m, expected):
    assert classify_regime(baseline, consumption, AgentState(w, m)) is expected


def test_power_safe_crossing():
    c = Power(0.5, 0.5)
    m_hat = c.safe_crossing(0.05)
    assert m_hat == pytest.approx(100.0)
    assert c.c(m_hat) == pytest.approx(0.05 * m_hat)
    assert Power(1.0, 1.0).safe_crossing(0.05) is None
