from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratchet_ruin import Affine, OutOfRegime, derive_constants
from ratchet_ruin.closed_form import (
    dpsi_fixed_max,
    fixed_max_solution,
    phi_m_at_max,
    pi_fixed_max,
    psi_fixed_max,
    shortfall_sde_coefficients,
)
from ratchet_ruin.diagnostics import gbm_hitting_laplace

FOUR = Affine(0.0, 4.0)


@pytest.fixture(scope="module")
def sol(baseline):
    return fixed_max_solution(baseline, FOUR, 100.0)


def test_boundary_values(sol):
    assert psi_fixed_max(sol, 0.0) == 1.0
    assert psi_fixed_max(sol, -3.0) == 1.0
    assert psi_fixed_max(sol, 80.0) == 0.0
    assert psi_fixed_max(sol, 95.0) == 0.0


def test_baseline_value(sol):
    # (1/2)**gamma, 40-digit reference
    assert psi_fixed_max(sol, 40.0) == pytest.approx(0.24466324369235524, rel=1e-13)


def test_baseline_strategy(sol, baseline):
    assert pi_fixed_max(sol, 40.0, baseline) == pytest.approx(48.49045732013176, rel=1e-13)
    assert pi_fixed_max(sol, 20.0, baseline) == pytest.approx(2 * pi_fixed_max(sol, 50.0, baseline))
    assert pi_fixed_max(sol, 79.9999, baseline) < 1e-3
    with pytest.raises(OutOfRegime):
        pi_fixed_max(sol, 80.0, baseline)


def test_shortfall_coefficients(sol, baseline):
    drift, vol = shortfall_sde_coefficients(sol, baseline)
    assert vol == pytest.approx(0.25 / 1.031130716501647, rel=1e-12)
    assert drift == pytest.approx(0.05 - 0.0625 / 1.031130716501647, rel=1e-12)
    assert vol == pytest.approx(0.24245, abs=1e-4)
    assert drift == pytest.approx(-0.01061, abs=1e-4)


def test_wrong_regime(baseline):
    with pytest.raises(OutOfRegime):
        fixed_max_solution(baseline, Affine(0.06), 100.0)


@given(st.floats(0.01, 0.99))
@settings(max_examples=100, deadline=None)
def test_matches_hitting_oracle(baseline, frac):
    """Ruin is the shortfall c/r - W reaching c/r before an Exp(lam) clock rings."""
    sol = fixed_max_solution(baseline, FOUR, 100.0)
    w = frac * sol.safe_level
    drift, vol = shortfall_sde_coefficients(sol, baseline)
    oracle = gbm_hitting_laplace(sol.safe_level - w, sol.safe_level, drift, vol, baseline.lam)
    assert psi_fixed_max(sol, w) == pytest.approx(oracle, rel=1e-10)


def test_derivatives_against_differences(sol):
    w = np.linspace(5.0, 75.0, 15)
    h = 1e-4
    d1, d2 = dpsi_fixed_max(sol, w)
    fd1 = (psi_fixed_max(sol, w + h) - psi_fixed_max(sol, w - h)) / (2 * h)
    fd2 = (psi_fixed_max(sol, w + h) - 2 * psi_fixed_max(sol, w) + psi_fixed_max(sol, w - h)) / h**2
    assert np.allclose(d1, fd1, rtol=1e-7)
    assert np.allclose(d2, fd2, rtol=1e-4)
    assert np.all(d1 < 0) and np.all(d2 > 0)


def test_value_decreases_to_zero(sol):
    w = np.linspace(0.0, 80.0, 201)
    v = psi_fixed_max(sol, w)
    assert np.all(np.diff(v) < 0)
    assert v[-1] == 0.0
    assert psi_fixed_max(sol, 80.0 - 1e-6) < 1e-15


def test_phi_m_positive(baseline):
    sol = fixed_max_solution(baseline, Affine(0.03, 1.0), 100.0)
    for w in (10.0, 40.0, 70.0):
        assert phi_m_at_max(sol, Affine(0.03, 1.0), w) > 0


def test_gamma_large_limit(baseline):
    sol = fixed_max_solution(baseline, FOUR, 100.0)
    big = type(sol)(m=sol.m, c_of_m=sol.c_of_m, gamma=1e9, r=sol.r)
    assert shortfall_sde_coefficients(big, baseline)[1] < 1e-9
    assert derive_constants(baseline).gamma == sol.gamma
