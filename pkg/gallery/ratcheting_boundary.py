"""Letting consumption ratchet up with maximum wealth.

For spending c(m) = 0.06 m + 1 starting at m = 2, raising the maximum is
optimal until a level m* after which the retiree caps wealth.  The moving
boundary is integrated from m* downward, and at m* it must agree with the
capped solution.  A concave spending rule (0.5 sqrt(m)) instead ratchets all
the way to its safe level, and the ratcheting value sits below the capped one
for every maximum along the way.

Run with ``python gallery/ratcheting_boundary.py`` (about 10 s).
"""

from __future__ import annotations

import numpy as np

from ratchet_ruin import Affine, MarketParams, Power
from ratchet_ruin.ratchet_active import integrate_boundaries, psi_active
from ratchet_ruin.ratchet_blocked import dual_function, find_m_star, psi_blocked, solve_boundary

market = MarketParams(r=0.05, mu=0.10, sigma=0.20, lam=0.04)

linear = Affine(0.06, 1.0)
search = find_m_star(market, linear, 2.0)
print(f"linear spending: m* = {search.m_star:.6f} ({search.binding} binds)")

mb = integrate_boundaries(market, linear, 2.0)
print(f"{len(mb.m_grid)} nodes, worst node residual {mb.residuals.max():.1e}")
print(f"{'m':>8} {'y0':>10} {'ym':>10} {'psi(m/2, m)':>12}")
for m in np.linspace(mb.m0, mb.m_star, 6):
    s = mb.slice_at(float(m))
    print(f"{m:8.3f} {s.y_0:10.5g} {s.y_m:10.5g} {float(psi_active(mb, m / 2, float(m))):12.6f}")

end = mb.slice_at(mb.m_star)
capped = solve_boundary(market, linear, mb.m_star)
print(f"at m*: y0 {end.y_0:.12g} vs capped {capped.y_0:.12g}")

root = Power(0.5, 0.5)
mb = integrate_boundaries(market, root, 30.0)
print(f"\nsquare-root spending: ratchets up to m* = {mb.m_star:g} ({mb.binding})")
print(f"{'m':>6} {'w':>6} {'ratcheting':>11} {'capped':>9}")
for m in (30.0, 50.0, 80.0):
    for w in (0.25 * m, 0.75 * m):
        print(f"{m:6.0f} {w:6.1f} {float(psi_active(mb, w, m)):11.6f} {float(psi_blocked(dual_function(market, root, m), w)):9.6f}")
