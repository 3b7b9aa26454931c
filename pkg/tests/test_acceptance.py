"""Acceptance criteria 1-11, each at its stated tolerance and runtime limit.

Every test records one line in ``RESULTS``; ``conftest.py`` prints them at the
end of the run, so ``pytest tests/test_acceptance.py`` ends with a pass/fail
table.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest

from ratchet_ruin import Affine, AgentState, MarketParams, Power, derive_constants
from ratchet_ruin.cli import cmd_simulate, dumps
from ratchet_ruin.closed_form import fixed_max_solution, psi_fixed_max, shortfall_sde_coefficients
from ratchet_ruin.diagnostics import (
    BlockedValue,
    FixedMaxValue,
    gbm_hitting_laplace,
    hjb_residual,
    benchmark_comparison_suite,
)
from ratchet_ruin.ratchet_active import integrate_boundaries, psi_active, psi_m_on_diagonal
from ratchet_ruin.ratchet_blocked import (
    boundary_residuals,
    dual_function,
    find_m_star,
    psi_blocked,
    ratio_equation,
    solve_boundary,
)
from ratchet_ruin.scenario import loads
from ratchet_ruin.simulator import (
    Blocked,
    FixedMax,
    Scheme,
    SimConfig,
    overshoot_bound,
    simulate_ruin_states,
    simulate_with_excursions,
)

BASE = MarketParams(r=0.05, mu=0.10, sigma=0.20, lam=0.04)
FOUR = Affine(0.0, 4.0)
LINEAR = Affine(0.06)
RESULTS: list[str] = []


class Clock:
    def __init__(self, limit: float):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def record(number: int, title: str, ok: bool, clock: Clock, detail: str) -> None:
    in_time = clock.elapsed < clock.limit
    verdict = "PASS" if ok and in_time else "FAIL"
    RESULTS.append(
        f"criterion {number:2d} {verdict}  {title}: {detail}; runtime {clock.elapsed:.2f}s (limit {clock.limit:g}s)"
    )
    assert ok, detail
    assert in_time, f"runtime {clock.elapsed:.2f}s exceeds {clock.limit}s"


def test_criterion_01_b1_identity():
    rng = np.random.default_rng(20240601)
    with Clock(1.0) as clock:
        worst = 0.0
        for _ in range(100):
            r = rng.uniform(0.005, 0.15)
            p = MarketParams(r=r, mu=r + rng.uniform(0.005, 0.3), sigma=rng.uniform(0.05, 0.8), lam=rng.uniform(0.005, 0.3))
            k = derive_constants(p)
            worst = max(worst, abs(k.B1 - k.gamma / (k.gamma - 1.0)) / k.B1)
    record(1, "B1 = gamma/(gamma-1)", worst <= 1e-12, clock, f"worst relative gap {worst:.2e} over 100 markets (tol 1e-12)")


@pytest.mark.slow
def test_criterion_02_closed_form_vs_monte_carlo():
    sol = fixed_max_solution(BASE, FOUR, 100.0)
    wealth = [10.0, 25.0, 40.0, 55.0, 70.0]
    cfg = SimConfig(dt=1e-3, n_paths=200_000, seed=2, scheme=Scheme.EXACT_SHORTFALL_GBM)
    with Clock(120.0) as clock:
        estimates = simulate_ruin_states(BASE, FOUR, [AgentState(w, 100.0) for w in wealth], FixedMax(), cfg)
    parts, ok = [], True
    for w, est in zip(wealth, estimates):
        gap = abs(est.point - psi_fixed_max(sol, w))
        tol = 3 * est.std_error + est.truncation_bias_bound
        ok &= gap <= tol
        parts.append(f"w={w:g} |gap|={gap:.4f}<={tol:.4f}")
    record(2, "closed form vs Monte Carlo (5 states, 2e5 paths, dt=1e-3)", ok, clock, ", ".join(parts))


def test_criterion_03_hitting_oracle():
    sol = fixed_max_solution(BASE, FOUR, 100.0)
    drift, vol = shortfall_sde_coefficients(sol, BASE)
    with Clock(1.0) as clock:
        worst = 0.0
        for w in np.linspace(2.0, 78.0, 20):
            oracle = gbm_hitting_laplace(sol.safe_level - w, sol.safe_level, drift, vol, BASE.lam)
            worst = max(worst, abs(psi_fixed_max(sol, w) - oracle) / oracle)
    record(3, "closed form = shortfall hitting oracle", worst <= 1e-10, clock, f"worst relative gap {worst:.2e} at 20 states (tol 1e-10)")


def test_criterion_04_boundary_system():
    with Clock(1.0) as clock:
        b = solve_boundary(BASE, LINEAR, 100.0)
        res = boundary_residuals(dual_function(BASE, LINEAR, 100.0))
        lhs, rhs = ratio_equation(BASE, LINEAR, 100.0)
        z = np.geomspace(1.0, 10.0 * b.ratio, 100_001)
        crossings = int(np.count_nonzero(np.diff(np.sign(lhs(z) - rhs))))
    rows = max(v for k, v in res.items() if k != "ratio_equation")
    ok = rows < 1e-9 and res["ratio_equation"] < 1e-12 and crossings == 1
    detail = f"boundary rows {rows:.1e} (tol 1e-9), ratio equation {res['ratio_equation']:.1e} (tol 1e-12), sign changes on [1, 10 z*] = {crossings}"
    record(4, "capped-wealth boundary system", ok, clock, detail)


@pytest.mark.slow
def test_criterion_05_capped_value_vs_monte_carlo():
    f = dual_function(BASE, LINEAR, 100.0)
    wealth = [25.0, 50.0, 75.0]
    # step 2e-3: no step is fixed by the criterion; see the decisions ledger for the bias study
    cfg = SimConfig(dt=2e-3, n_paths=200_000, seed=5)
    with Clock(180.0) as clock:
        runs = simulate_with_excursions(BASE, LINEAR, [AgentState(w, 100.0) for w in wealth], Blocked(), cfg)
    bound = overshoot_bound(BASE, LINEAR, 100.0, Blocked(), cfg.dt)
    parts, ok = [], True
    for w, (est, excursion) in zip(wealth, runs):
        gap = abs(est.point - psi_blocked(f, w))
        tol = 3 * est.std_error + est.truncation_bias_bound
        ok &= gap <= tol and excursion <= bound
        parts.append(f"w={w:g} |gap|={gap:.4f}<={tol:.4f} excursion={excursion:.4f}")
    detail = ", ".join(parts) + f", overshoot bound {bound:.4f}"
    record(5, "capped-wealth value vs Monte Carlo (3 states, 2e5 paths)", ok, clock, detail)


def test_criterion_06_comparison_inequalities():
    configs = [(Affine(0.06), 100.0), (Affine(0.3), 10.0), (Affine(0.06, 1.0), 25.0)]
    with Clock(5.0) as clock:
        reports = [benchmark_comparison_suite(BASE, cons, m, n=50) for cons, m in configs]
    margins = [min(row["min_margin"] for row in rep.details) for rep in reports]
    ok = all(rep.passed for rep in reports)
    detail = "smallest margins " + ", ".join(f"{v:.2e}" for v in margins) + " (floor 1e-12, 4 inequalities x 3 configurations)"
    record(6, "benchmark comparison inequalities", ok, clock, detail)


def test_criterion_07_hjb_residuals():
    with Clock(5.0) as clock:
        closed = hjb_residual(FixedMaxValue(BASE, FOUR, 100.0), BASE, FOUR, n=100, threshold=1e-8)
        capped = hjb_residual(BlockedValue(BASE, LINEAR, 100.0), BASE, LINEAR, n=100, threshold=1e-8)
        wrong = hjb_residual(BlockedValue(BASE, LINEAR, 100.0, d1_scale=1.01), BASE, LINEAR, n=100, threshold=1e-8)
    ok = closed.passed and capped.passed and not wrong.passed
    detail = f"closed form {closed.worst_residual:.1e}, capped {capped.worst_residual:.1e} (tol 1e-8); D1 x 1.01 control {wrong.worst_residual:.1e} fails"
    record(7, "HJB residuals and negative control", ok, clock, detail)


def test_criterion_08_terminal_matching():
    cons = Affine(0.06, 1.0)
    with Clock(30.0) as clock:
        mb = integrate_boundaries(BASE, cons, 2.0)
        ms = mb.m_star
        ref = solve_boundary(BASE, cons, ms)
        got = mb.slice_at(ms)
        match = max(abs(getattr(got, a) / getattr(ref, a) - 1.0) for a in ("y_0", "y_m", "D1", "D2"))
        w = np.linspace(0.0, ms, 20)
        value_gap = float(np.max(np.abs(psi_active(mb, w, ms) - psi_blocked(dual_function(BASE, cons, ms), w))))
        node_res = float(mb.residuals.max())
        envelope = max(abs(psi_m_on_diagonal(mb, float(m))) for m in mb.m_grid)
    ok = match <= 1e-8 and value_gap <= 1e-6 and node_res < 1e-9 and envelope <= 1e-3
    detail = (
        f"m*={ms:.6f}, terminal match {match:.1e} (tol 1e-8), value gap {value_gap:.1e} (tol 1e-6), "
        f"node residual {node_res:.1e} (tol 1e-9), |f_m(m,m)| {envelope:.1e} over {len(mb.m_grid)} nodes (tol 1e-3)"
    )
    record(8, "moving boundary meets the capped solution at m*", ok, clock, detail)


def test_criterion_09_dominance():
    cons = Power(0.5, 0.5)
    with Clock(10.0) as clock:
        mb = integrate_boundaries(BASE, cons, 30.0)
        worst = math.inf
        for m in np.linspace(30.0, mb.m_star, 8)[:-1]:
            w = np.linspace(0.0, m, 22)[1:-1]
            gap = psi_blocked(dual_function(BASE, cons, float(m)), w) - psi_active(mb, w, float(m))
            worst = min(worst, float(gap.min()))
    detail = f"smallest psi_capped - psi_ratchet {worst:.2e} over 7 levels x 20 interior wealths; c'(0) = inf > r"
    record(9, "ratcheting value below the capped value", worst > 0, clock, detail)


def test_criterion_10_m_star():
    cons = Power(0.5, 0.5)
    with Clock(30.0) as clock:
        m_hat = cons.safe_crossing(BASE.r)
        coarse = find_m_star(BASE, cons, 30.0, grid_factor=1.05).m_star
        fine = find_m_star(BASE, cons, 30.0, grid_factor=1.05**0.5).m_star
        cond = Affine(0.06, 1.0)
        c_coarse = find_m_star(BASE, cond, 2.0, grid_factor=1.05).m_star
        c_fine = find_m_star(BASE, cond, 2.0, grid_factor=1.05**0.5).m_star
    change = max(abs(fine - coarse) / coarse, abs(c_fine - c_coarse) / c_coarse)
    ok = coarse <= m_hat * (1 + 1e-12) and change <= 1e-6
    detail = f"m*={coarse:.10g} <= m_hat={m_hat:.10g}; change under grid doubling {change:.1e} (tol 1e-6, both bindings)"
    record(10, "m* bound and grid stability", ok, clock, detail)


SCENARIO = """
[market]
riskless_rate_per_year = 0.05
risky_drift_per_year = 0.10
volatility_per_sqrt_year = 0.20
hazard_rate_per_year = 0.04
[consumption]
family = affine
slope_per_year = 0.0
intercept_currency_per_year = 4.0
[state]
wealth_currency = 40.0
max_wealth_currency = 100.0
[sim]
paths = 20000
seed = 7
"""


@pytest.mark.slow
def test_criterion_11_determinism():
    scenario = loads(SCENARIO)
    with Clock(120.0) as clock:
        outputs = [dumps(cmd_simulate(scenario, workers=k)) for k in (1, 2, 8)]
        repeat = dumps(cmd_simulate(scenario, workers=8))
    ok = outputs[0] == outputs[1] == outputs[2] == repeat
    point = json.loads(outputs[0])["estimate"]["point"]
    record(11, "byte-identical simulate output for 1, 2, 8 workers", ok, clock, f"{len(outputs[0])} bytes each, estimate {point}")
