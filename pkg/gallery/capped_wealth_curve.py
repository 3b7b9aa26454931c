"""Consumption tied to maximum wealth, with the maximum held fixed.

When spending rises with the running maximum (here c(m) = 0.06 m) the retiree
may prefer never to set a new maximum.  Solving that capped problem through
its convex dual gives a value a little above the closed form for the same
spending rate, since holding wealth under m gives up the upside, and a
strategy that stops investing as wealth nears m.
The script prints both curves and checks the capped solution against its
sufficient conditions.

Run with ``python gallery/capped_wealth_curve.py``.
"""

from __future__ import annotations

import numpy as np

from ratchet_ruin import Affine, MarketParams
from ratchet_ruin.closed_form import fixed_max_solution, psi_fixed_max
from ratchet_ruin.diagnostics import BlockedValue, verification_conditions
from ratchet_ruin.ratchet_blocked import dual_function, pi_blocked, psi_blocked, ratchet_condition

market = MarketParams(r=0.05, mu=0.10, sigma=0.20, lam=0.04)
spending = Affine(0.06)
m = 100.0

f = dual_function(market, spending, m)
b = f.boundary
print(f"dual boundary: y0 = {b.y_0:.6g}, ym = {b.y_m:.6g}, ratio = {b.ratio:.6f}")

# the same constant spending without the cap on wealth
free = fixed_max_solution(market, Affine(0.0, float(spending.c(m))), m, check_regime=False)

print(f"{'w':>5} {'capped':>9} {'uncapped':>9} {'risky $':>8}")
for w in np.linspace(5.0, 95.0, 10):
    print(f"{w:5.0f} {float(psi_blocked(f, w)):9.5f} {float(psi_fixed_max(free, w)):9.5f} {float(pi_blocked(f, w, market)):8.2f}")

# does the no-ratchet test hold, so that capping wealth at m is optimal?
cond = ratchet_condition(market, spending, m)
print("ratchet condition:", cond)

report = verification_conditions(BlockedValue(market, spending, m), market, spending)
for row in report.details:
    print(f"  {row['condition']:<26} {'ok' if row['pass'] else 'FAILS'}  ({row['violation']:.1e})")
