from __future__ import annotations

import numpy as np
import pytest

from ratchet_ruin import Affine, AgentState, OutOfRegime, Power
from ratchet_ruin.diagnostics import (
    ActiveValue,
    BlockedValue,
    FixedMaxValue,
    hjb_residual,
    mc_cross_check,
    regime_suite,
    benchmark_comparison_suite,
    verification_conditions,
)
from ratchet_ruin.simulator import RuinEstimate

FOUR = Affine(0.0, 4.0)


def test_hjb_closed_form(baseline):
    report = hjb_residual(FixedMaxValue(baseline, FOUR, 100.0), baseline, FOUR)
    assert report.worst_residual < 1e-8
    assert report.passed and len(report.grid) == 100


def test_hjb_capped_solution(baseline, linear_six):
    report = hjb_residual(BlockedValue(baseline, linear_six, 100.0), baseline, linear_six)
    assert report.worst_residual < 1e-8


@pytest.mark.parametrize("m, consumption", [(100.0, Affine(0.06)), (10.0, Affine(0.3)), (25.0, Affine(0.06, 1.0))])
def test_perturbed_candidate_fails(baseline, m, consumption):
    report = hjb_residual(BlockedValue(baseline, consumption, m, d1_scale=1.01), baseline, consumption)
    assert not report.passed


def test_moving_boundary_slice_satisfies_hjb(sqrt_boundary):
    v = ActiveValue(sqrt_boundary, 50.0)
    grid = np.linspace(0.0, 50.0, 52)[1:-1]
    assert hjb_residual(v, sqrt_boundary.params, sqrt_boundary.consumption, grid).passed


def test_verification_closed_form(baseline):
    v = FixedMaxValue(baseline, Affine(0.03, 1.0), 100.0)
    report = verification_conditions(v, baseline, Affine(0.03, 1.0))
    assert report.passed
    assert v.dm_on_diagonal() > 0


def test_verification_capped(baseline, linear_six):
    report = verification_conditions(BlockedValue(baseline, linear_six, 100.0), baseline, linear_six)
    assert report.passed
    rows = {r["condition"]: r for r in report.details}
    assert rows["h_m_on_diagonal"]["h_m"] >= 0


def test_capped_candidate_fails_where_ratcheting_pays(baseline):
    cons = Power(0.5, 0.5)
    report = verification_conditions(BlockedValue(baseline, cons, 30.0), baseline, cons)
    rows = {r["condition"]: r for r in report.details}
    assert not rows["h_m_on_diagonal"]["pass"]
    assert not report.passed


@pytest.mark.parametrize("m, consumption", [(100.0, Affine(0.06)), (10.0, Affine(0.3)), (25.0, Affine(0.06, 1.0))])
def test_comparison_inequalities(baseline, m, consumption):
    report = benchmark_comparison_suite(baseline, consumption, m)
    assert report.passed
    rows = {r["sub_check"]: r for r in report.details}
    assert all(r["min_margin"] > 1e-12 for r in rows.values())
    gap = rows["pi_below_benchmark"]
    assert gap["argmin_w"] < 0.1 * m
    assert gap["argmax_w"] > 0.9 * m


def test_comparison_needs_capped_regime(baseline):
    with pytest.raises(OutOfRegime):
        benchmark_comparison_suite(baseline, Affine(0.04), 100.0)


def _estimate(point, se):
    return RuinEstimate(point, se, 1e-6, 0, 0, 0, 0, 1000)


def test_cross_check_separates():
    assert mc_cross_check(0.25, _estimate(0.251, 0.001)).passed
    assert not mc_cross_check(0.25, _estimate(0.25 + 10 * 0.001, 0.001)).passed


def test_regime_suite(baseline, linear_six):
    assert all(r.passed for r in regime_suite(baseline, FOUR, AgentState(40.0, 100.0)))
    assert all(r.passed for r in regime_suite(baseline, linear_six, AgentState(50.0, 100.0)))
    assert not all(r.passed for r in regime_suite(baseline, linear_six, AgentState(50.0, 100.0), perturb_d1=1.01))
    with pytest.raises(OutOfRegime):
        regime_suite(baseline, FOUR, AgentState(90.0, 100.0))
