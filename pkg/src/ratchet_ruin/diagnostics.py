"""Numerical checks of candidate value functions and Monte Carlo cross-checks.

A value function here is any object with ``psi``, ``dpsi`` and ``d2psi`` in
wealth at a fixed maximum ``m`` plus ``dm_on_diagonal`` for the m-derivative at
w = m; see :class:`FixedMaxValue`, :class:`BlockedValue` and
:class:`ActiveValue`.  Every check returns a :class:`CheckReport`; nothing here
mutates solver state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .closed_form import dpsi_fixed_max, fixed_max_solution, phi_m_at_max, psi_fixed_max
from .errors import InvalidParams, OutOfRegime
from .model import AgentState, ConsumptionSpec, MarketParams, Regime, classify_regime, derive_constants
from .ratchet_blocked import DualFunction, dual_function, invert_dual, psi_blocked
from .simulator import RuinEstimate

ANALYTIC_THRESHOLD = 1e-6
FD_THRESHOLD = 1e-3
STRICT_FLOOR = 1e-12
HM_FLOOR = -1e-3


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check; ``passed`` is True exactly when worst_residual <= threshold."""

    check_name: str
    grid: list
    worst_residual: float
    threshold: float
    details: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.worst_residual <= self.threshold)

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "pass": self.passed,
            "worst_residual": self.worst_residual,
            "threshold": self.threshold,
            "grid": [float(g) for g in self.grid],
            "details": self.details,
        }


# ---------------------------------------------------------------- value functions


class FixedMaxValue:
    """(1 - r w / c(m))**gamma with analytic derivatives, for c(m)/r <= m."""

    analytic = True

    def __init__(self, params: MarketParams, consumption: ConsumptionSpec, m: float):
        self.params, self.consumption, self.m = params, consumption, float(m)
        self.sol = fixed_max_solution(params, consumption, m)

    @property
    def upper(self) -> float:
        """Right end of the region where the value is smooth."""
        return min(self.m, self.sol.safe_level)

    def psi(self, w):
        return psi_fixed_max(self.sol, w)

    def dpsi(self, w):
        return dpsi_fixed_max(self.sol, w)[0]

    def d2psi(self, w):
        return dpsi_fixed_max(self.sol, w)[1]

    def dm(self, w, rel_step: float = 1e-5) -> np.ndarray:
        """Central-difference m-derivative at fixed w."""
        h = rel_step * self.m
        up = fixed_max_solution(self.params, self.consumption, self.m + h, check_regime=False)
        dn = fixed_max_solution(self.params, self.consumption, self.m - h, check_regime=False)
        return (psi_fixed_max(up, w) - psi_fixed_max(dn, w)) / (2 * h)

    def dm_on_diagonal(self) -> float:
        # w = m lies at or above the safe level, where the value is 0 for every nearby m;
        # the smallest m-derivative over the smooth region is reported instead
        w = np.linspace(0.0, self.upper, 52)[1:-1]
        return float(np.min(self.dm(w)))


class BlockedValue:
    """Value of the capped-wealth problem at level ``m``, derivatives through the dual.

    ``d1_scale`` multiplies D1 in the value formula while the wealth-to-dual
    map stays the unperturbed one, which gives a deliberately wrong candidate
    for negative controls.
    """

    analytic = True

    def __init__(self, params: MarketParams, consumption: ConsumptionSpec, m: float, d1_scale: float = 1.0):
        self.params, self.consumption, self.m = params, consumption, float(m)
        self.d1_scale = d1_scale
        self.f = dual_function(params, consumption, m)
        self.g = self.f.with_D1_scaled(d1_scale) if d1_scale != 1.0 else self.f

    @property
    def upper(self) -> float:
        return self.m

    def _y(self, w):
        y = np.asarray(invert_dual(self.f, w), dtype=float)
        dy = 1.0 / self.f.d2(y)
        ddy = -self.f.d3(y) * dy**3
        return y, dy, ddy

    def psi(self, w):
        if self.d1_scale == 1.0:
            return psi_blocked(self.f, w)
        y = np.asarray(invert_dual(self.f, w), dtype=float)
        return self.g.value(y) - np.asarray(w, dtype=float) * y

    def dpsi(self, w):
        y, dy, _ = self._y(w)
        return (self.g.d1(y) - np.asarray(w, dtype=float)) * dy - y

    def d2psi(self, w):
        y, dy, ddy = self._y(w)
        return self.g.d2(y) * dy**2 - 2.0 * dy + (self.g.d1(y) - np.asarray(w, dtype=float)) * ddy

    def dm_on_diagonal(self, rel_step: float = 1e-5) -> float:
        """d Psi / d m at w = m, as the m-derivative of the dual at fixed y = y_m."""
        h = rel_step * self.m
        y = self.f.boundary.y_m
        up = dual_function(self.params, self.consumption, self.m + h).value(y)
        dn = dual_function(self.params, self.consumption, self.m - h).value(y)
        return float((up - dn) / (2 * h))


class ActiveValue:
    """Slice w -> psi(w, m) of a moving-boundary solution, differentiated numerically."""

    analytic = False

    def __init__(self, boundary, m: float, rel_step: float = 1e-5):
        from .ratchet_active import psi_active

        self.mb, self.m, self.rel_step = boundary, float(m), rel_step
        self.params, self.consumption = boundary.params, boundary.consumption
        self._psi = lambda w: psi_active(boundary, w, self.m)

    @property
    def upper(self) -> float:
        return self.m

    def psi(self, w):
        return self._psi(w)

    def _steps(self, w):
        w = np.asarray(w, dtype=float)
        h = self.rel_step * self.m
        return w, np.minimum(h, 0.5 * np.minimum(w, self.m - w) + 1e-300)

    def dpsi(self, w):
        w, h = self._steps(w)
        return (self.psi(w + h) - self.psi(w - h)) / (2 * h)

    def d2psi(self, w):
        w, h = self._steps(w)
        return (self.psi(w + h) - 2 * self.psi(w) + self.psi(w - h)) / (h * h)

    def dm_on_diagonal(self) -> float:
        from .ratchet_active import psi_m_on_diagonal

        return psi_m_on_diagonal(self.mb, self.m, self.rel_step)


class _Richardson:
    """Richardson-extrapolated finite differences of another value's ``psi``."""

    analytic = False

    def __init__(self, value):
        self.inner = value
        self.m, self.upper = value.m, value.upper

    def psi(self, w):
        return self.inner.psi(w)

    def _h(self, w):
        return np.minimum(1e-3 * self.m, 0.25 * np.minimum(w, self.m - w))

    def dpsi(self, w):
        w = np.asarray(w, dtype=float)
        h = self._h(w)
        d = lambda s: (self.psi(w + s) - self.psi(w - s)) / (2 * s)  # noqa: E731
        return (4 * d(h / 2) - d(h)) / 3

    def d2psi(self, w):
        w = np.asarray(w, dtype=float)
        h = self._h(w)
        d = lambda s: (self.psi(w + s) - 2 * self.psi(w) + self.psi(w - s)) / (s * s)  # noqa: E731
        return (4 * d(h / 2) - d(h)) / 3


# ---------------------------------------------------------------- checks


def _grid(value, n: int) -> np.ndarray:
    return np.linspace(0.0, value.upper, n + 2)[1:-1]


def _hjb_terms(value, params, consumption, w):
    c = float(consumption.c(value.m))
    delta = derive_constants(params).delta
    p, d1, d2 = value.psi(w), value.dpsi(w), value.d2psi(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.array([(params.r * w - c) * d1, -delta * d1 * d1 / d2, -params.lam * p])
    return p, d1, d2, terms


def hjb_residual(
    value,
    params: MarketParams,
    consumption: ConsumptionSpec,
    region: np.ndarray | None = None,
    *,
    n: int = 100,
    threshold: float | None = None,
) -> CheckReport:
    """Relative residual of (r w - c) psi_w - delta psi_w^2 / psi_ww - lam psi = 0.

    Each residual is divided by the largest of the three terms.  Points where
    psi is not decreasing and strictly convex are reported as failures
    (degenerate second derivative) instead of being evaluated.  The default
    threshold is 1e-6 for analytic derivatives and 1e-3 for numerical ones;
    with numerical derivatives a near miss is re-evaluated with Richardson
    extrapolation.
    """
    w = _grid(value, n) if region is None else np.asarray(region, dtype=float)
    if threshold is None:
        threshold = ANALYTIC_THRESHOLD if value.analytic else FD_THRESHOLD

    def evaluate(v):
        _, d1, d2, terms = _hjb_terms(v, params, consumption, w)
        scale = np.max(np.abs(terms), axis=0)
        rel = np.abs(terms.sum(axis=0)) / np.where(scale > 0, scale, 1.0)
        degenerate = ~((d2 > 0) & (d1 < 0) & np.isfinite(rel))
        return np.where(degenerate, np.inf, rel), degenerate

    rel, degenerate = evaluate(value)
    if not value.analytic and threshold / 10 <= rel.max() < math.inf:
        rel, degenerate = evaluate(_Richardson(value))
    details = [
        {"w": float(wi), "relative_residual": float(ri), "degenerate_second_derivative": bool(di)}
        for wi, ri, di in zip(w, rel, degenerate)
    ]
    return CheckReport("hjb_residual", list(w), float(rel.max()), threshold, details)


def verification_conditions(
    value,
    params: MarketParams,
    consumption: ConsumptionSpec,
    region: np.ndarray | None = None,
    *,
    n: int = 100,
) -> CheckReport:
    """Check the sufficient conditions for a candidate to be the minimum ruin probability.

    Rows: h non-increasing and convex in w; h_m(m, m) >= -1e-3; h(0, m) = 1;
    h = 0 at the safe level when it lies in [0, m]; L^alpha h >= 0 for alpha
    at, below and above the minimiser, with equality at the minimiser.  Each row carries its own violation and
    tolerance; the report's worst residual is the largest violation/tolerance
    ratio, so the report passes when every row does.
    """
    w = _grid(value, n) if region is None else np.asarray(region, dtype=float)
    rows = []

    def row(name: str, violation: float, tol: float, **extra) -> None:
        rows.append({"condition": name, "violation": float(violation), "tolerance": tol,
                     "pass": bool(violation <= tol), **extra})

    p, d1, d2, terms = _hjb_terms(value, params, consumption, w)
    scale = np.maximum(np.abs(p), 1e-300)
    row("non_increasing", float(np.max(np.maximum(d1, 0.0) / scale)), STRICT_FLOOR)
    row("convex", float(np.max(np.maximum(-d2, 0.0) / np.maximum(np.abs(d2), 1e-300))), STRICT_FLOOR)

    hm = value.dm_on_diagonal()
    row("h_m_on_diagonal", max(HM_FLOOR - hm, 0.0), 0.0, h_m=hm)

    h0 = float(np.asarray(value.psi(0.0)))
    row("unit_at_zero", abs(h0 - 1.0), 1e-10, value_at_zero=h0)

    safe = float(consumption.c(value.m)) / params.r
    if safe <= value.m:
        hs = float(np.asarray(value.psi(safe)))
        row("zero_at_safe_level", abs(hs), 1e-12, value_at_safe_level=hs)
    else:
        row("zero_at_safe_level", 0.0, 0.0, applicable=False)

    hjb = hjb_residual(value, params, consumption, w)
    row("equality_at_minimiser", hjb.worst_residual, hjb.threshold)
    c = float(consumption.c(value.m))
    alpha_star = -params.merton_factor * d1 / d2
    worst = 0.0
    for factor in (0.0, 0.5, 1.5, -1.0):
        alpha = factor * alpha_star
        gen = (params.r * w + (params.mu - params.r) * alpha - c) * d1 + 0.5 * params.sigma**2 * alpha**2 * d2 - params.lam * p
        worst = max(worst, float(np.max(np.maximum(-gen, 0.0) / np.max(np.abs(terms), axis=0))))
    row("nonnegative_off_minimiser", worst, hjb.threshold)

    ratio = max(r["violation"] / r["tolerance"] if r["tolerance"] > 0 else (math.inf if r["violation"] > 0 else 0.0) for r in rows)
    return CheckReport("verification_conditions", list(w), ratio, 1.0, rows)


def benchmark_comparison_suite(params: MarketParams, consumption: ConsumptionSpec, m: float, n: int = 50) -> CheckReport:
    """Compare the capped-wealth optimum with the constant-consumption benchmark.

    Four strict inequalities on ``n``-point grids of (0, m):
    the ruin probability exceeds (1 - r w/c(m))**gamma; that excess increases
    in w; the optimal risky amount is below the benchmark amount
    ((mu - r)/sigma^2)/(gamma - 1) (c(m)/r - w); and that shortfall increases
    in w.  Each must clear ``1e-12``; the report's worst residual is the
    floor minus the smallest margin.
    """
    consumption.require_increasing()
    if classify_regime(params, consumption, AgentState(0.5 * m, m)) is not Regime.RATCHET_BLOCKED:
        raise OutOfRegime(f"m={m} is not in the capped-wealth regime")
    k = derive_constants(params)
    c = float(consumption.c(m))
    f = dual_function(params, consumption, m)
    sol = fixed_max_solution(params, consumption, m, check_regime=False)

    w_val = m * np.arange(1, n + 1) / n  # (0, m]
    excess = psi_blocked(f, w_val) - psi_fixed_max(sol, w_val)
    w_pi = m * np.arange(1, n + 1) / (n + 1)  # (0, m)
    y = invert_dual(f, w_pi)
    pi_star = -params.merton_factor * y * f.d2(y)
    gap = params.merton_factor / (k.gamma - 1.0) * (c / params.r - w_pi) - pi_star

    subs = {
        "psi_exceeds_benchmark": (w_val, excess),
        "excess_increasing": (w_val[1:], np.diff(excess)),
        "pi_below_benchmark": (w_pi, gap),
        "pi_gap_increasing": (w_pi[1:], np.diff(gap)),
    }
    rows = []
    worst = -math.inf
    for name, (grid, margin) in subs.items():
        low = float(margin.min())
        rows.append({
            "sub_check": name,
            "pass": bool(low > STRICT_FLOOR),
            "min_margin": low,
            "argmin_w": float(grid[int(np.argmin(margin))]),
            "argmax_w": float(grid[int(np.argmax(margin))]),
            "margins": [float(v) for v in margin],
        })
        worst = max(worst, STRICT_FLOOR - low)
    # strictness: margin > floor  <=>  floor - margin < 0
    return CheckReport("benchmark_comparison_suite", list(w_val), worst, -1e-300, rows)


def mc_cross_check(analytic: float, estimate: RuinEstimate, k_sigma: float = 3.0) -> CheckReport:
    """Pass iff |analytic - point| <= k_sigma * std_error + truncation_bias_bound."""
    gap = abs(float(analytic) - estimate.point)
    tol = k_sigma * estimate.std_error + estimate.truncation_bias_bound
    details = [{
        "analytic": float(analytic),
        "point": estimate.point,
        "std_error": estimate.std_error,
        "truncation_bias_bound": estimate.truncation_bias_bound,
        "k_sigma": k_sigma,
        "z_score": gap / estimate.std_error if estimate.std_error > 0 else (0.0 if gap == 0 else math.inf),
    }]
    return CheckReport("mc_cross_check", [], gap, tol, details)


def gbm_hitting_laplace(x0: float, barrier: float, drift: float, vol: float, lam: float) -> float:
    """E[exp(-lam tau)] for the first time a geometric Brownian motion rises from x0 to barrier.

    With dZ = Z (drift dt + vol dB) the log moves with mean drift - vol^2/2,
    and for a Brownian motion with mean nu and volatility s started a
    distance d below a level, E[exp(-lam tau)] = exp(-d (sqrt(nu^2 + 2 lam s^2) - nu) / s^2).
    """
    if not (0 < x0 and 0 < barrier and vol > 0 and lam > 0):
        raise InvalidParams("need positive start, barrier, volatility and rate")
    if x0 >= barrier:
        return 1.0
    nu = drift - 0.5 * vol * vol
    d = math.log(barrier / x0)
    return math.exp(-d * (math.sqrt(nu * nu + 2.0 * lam * vol * vol) - nu) / (vol * vol))


def regime_suite(
    params: MarketParams,
    consumption: ConsumptionSpec,
    state: AgentState,
    *,
    perturb_d1: float = 1.0,
) -> list[CheckReport]:
    """All analytic checks that apply at the state's regime.

    ``perturb_d1`` != 1 scales D1 of the capped-wealth candidate (or, in the
    fixed-maximum regime, swaps in that perturbed candidate) as a negative
    control.
    """
    regime = classify_regime(params, consumption, state)
    m = state.m
    if regime is Regime.FIXED_MAX_BELOW_SAFE:
        if perturb_d1 != 1.0:
            raise OutOfRegime("the D1 perturbation applies to the capped-wealth candidate only")
        v = FixedMaxValue(params, consumption, m)
        return [hjb_residual(v, params, consumption), verification_conditions(v, params, consumption)]
    if regime is Regime.RATCHET_BLOCKED:
        v = BlockedValue(params, consumption, m, d1_scale=perturb_d1)
        return [
            hjb_residual(v, params, consumption),
            verification_conditions(v, params, consumption),
            benchmark_comparison_suite(params, consumption, m),
        ]
    if regime is Regime.RATCHET_ACTIVE:
        from .ratchet_active import integrate_boundaries

        mb = integrate_boundaries(params, consumption, m)
        if perturb_d1 != 1.0:
            v = BlockedValue(params, consumption, m, d1_scale=perturb_d1)
        else:
            v = ActiveValue(mb, m)
        grid = np.linspace(0.0, m, 52)[1:-1]
        return [hjb_residual(v, params, consumption, grid), verification_conditions(v, params, consumption, grid)]
    raise OutOfRegime(f"no analytic candidate to verify in regime {regime}")


__all__ = [
    "ActiveValue",
    "BlockedValue",
    "CheckReport",
    "FixedMaxValue",
    "gbm_hitting_laplace",
    "hjb_residual",
    "mc_cross_check",
    "regime_suite",
    "benchmark_comparison_suite",
    "verification_conditions",
]
