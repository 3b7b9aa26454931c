"""Fixed maximum: closed-form ruin probability against two independent checks.

With maximum wealth frozen at m the retiree consumes a constant c(m) and the
ruin probability has the closed form (1 - r w / c)^gamma.  Here it is set
against the Laplace transform of the shortfall's hitting time (an exact
oracle) and against Monte Carlo that runs every starting wealth off one set of
paths.

Run with ``python gallery/closed_form_vs_simulation.py`` (about 20 s).
"""

from __future__ import annotations

from ratchet_ruin import Affine, AgentState, MarketParams, derive_constants
from ratchet_ruin.closed_form import fixed_max_solution, pi_fixed_max, psi_fixed_max, shortfall_sde_coefficients
from ratchet_ruin.diagnostics import gbm_hitting_laplace
from ratchet_ruin.simulator import FixedMax, Scheme, SimConfig, simulate_ruin_states

market = MarketParams(r=0.05, mu=0.10, sigma=0.20, lam=0.04)
spending = Affine(0.0, 4.0)  # 4 per year whatever the maximum
m = 100.0

k = derive_constants(market)
sol = fixed_max_solution(market, spending, m)
print(f"gamma = {k.gamma:.6f}, safe level c/r = {sol.safe_level:g}")

# Under the optimal feedback the shortfall c/r - W is a geometric Brownian
# motion, so ruin is the event that it reaches c/r before death.
drift, vol = shortfall_sde_coefficients(sol, market)
wealth = [10.0, 25.0, 40.0, 55.0, 70.0]
config = SimConfig(dt=2e-3, n_paths=20_000, seed=1, scheme=Scheme.EXACT_SHORTFALL_GBM)
estimates = simulate_ruin_states(market, spending, [AgentState(w, m) for w in wealth], FixedMax(), config)

print(f"{'w':>5} {'closed form':>12} {'hitting':>12} {'Monte Carlo':>12} {'+/- 3 SE':>9} {'risky $':>8}")
for w, est in zip(wealth, estimates):
    oracle = gbm_hitting_laplace(sol.safe_level - w, sol.safe_level, drift, vol, market.lam)
    print(
        f"{w:5.0f} {float(psi_fixed_max(sol, w)):12.6f} {oracle:12.6f} "
        f"{est.point:12.4f} {3 * est.std_error:9.4f} {float(pi_fixed_max(sol, w, market)):8.2f}"
    )
