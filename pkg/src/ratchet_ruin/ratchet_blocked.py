"""Dual free-boundary solution when m < c(m)/r and wealth is held at or below m.

The concave dual of the ruin probability is

    psi_hat(y) = D1 * y**B1 + D2 * y**B2 + (c(m)/r) * y,    y_m <= y <= y_0,

with value 1 and slope 0 at ``y_0`` (the stopping boundary) and slope ``m``
and curvature 0 at ``y_m`` (the reflecting boundary).  The primal ruin
probability is its Legendre transform ``Psi(w) = max_y psi_hat(y) - w*y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, NoBracket, OutOfRegime, Unbounded
from .model import ConsumptionSpec, DerivedConstants, MarketParams, derive_constants

Z_MAX = 1e12


def _powterm(coef: float, exponent: float, y):
    """coef * y**exponent evaluated in log space (y > 0)."""
    if coef == 0.0:
        return np.zeros_like(y, dtype=float) if np.ndim(y) else 0.0
    return math.copysign(1.0, coef) * np.exp(math.log(abs(coef)) + exponent * np.log(y))


@dataclass(frozen=True)
class DualBoundary:
    """Free-boundary data for one value of maximum wealth ``m``."""

    y_m: float
    y_0: float
    D1: float
    D2: float
    m: float
    c_of_m: float
    r: float

    @property
    def ratio(self) -> float:
        return self.y_0 / self.y_m

    @property
    def c_over_r(self) -> float:
        return self.c_of_m / self.r


@dataclass(frozen=True)
class DualFunction:
    """psi_hat on [y_m, y_0] with analytic derivatives."""

    boundary: DualBoundary
    constants: DerivedConstants

    def value(self, y):
        b, k = self.boundary, self.constants
        return _powterm(b.D1, k.B1, y) + _powterm(b.D2, k.B2, y) + b.c_over_r * y

    def d1(self, y):
        b, k = self.boundary, self.constants
        return _powterm(b.D1 * k.B1, k.B1 - 1.0, y) + _powterm(b.D2 * k.B2, k.B2 - 1.0, y) + b.c_over_r

    def d2(self, y):
        b, k = self.boundary, self.constants
        return _powterm(b.D1 * k.B1 * (k.B1 - 1.0), k.B1 - 2.0, y) + _powterm(
            b.D2 * k.B2 * (k.B2 - 1.0), k.B2 - 2.0, y
        )

    def d3(self, y):
        b, k = self.boundary, self.constants
        return _powterm(b.D1 * k.B1 * (k.B1 - 1.0) * (k.B1 - 2.0), k.B1 - 3.0, y) + _powterm(
            b.D2 * k.B2 * (k.B2 - 1.0) * (k.B2 - 2.0), k.B2 - 3.0, y
        )

    def ode_residual(self, y, params: MarketParams):
        """Relative residual of delta*y^2 f'' - (r - lam)*y f' - lam*f + c*y = 0."""
        k, b = self.constants, self.boundary
        y = np.asarray(y, dtype=float)
        terms = np.stack(
            [
                k.delta * y**2 * self.d2(y),
                -(params.r - params.lam) * y * self.d1(y),
                -params.lam * self.value(y),
                b.c_of_m * y,
            ]
        )
        return np.abs(terms.sum(axis=0)) / np.abs(terms).sum(axis=0)

    def with_D1_scaled(self, factor: float) -> "DualFunction":
        b = self.boundary
        scaled = DualBoundary(b.y_m, b.y_0, b.D1 * factor, b.D2, b.m, b.c_of_m, b.r)
        return DualFunction(scaled, self.constants)


def _lhs_4_13(z, B1: float, B2: float):
    a1 = (1.0 - B2) / (B1 - B2)
    a2 = (B1 - 1.0) / (B1 - B2)
    lz = np.log(z)
    return a1 * np.exp((B1 - 1.0) * lz) + a2 * np.exp((B2 - 1.0) * lz)


def ratio_equation(params: MarketParams, consumption: ConsumptionSpec, m: float):
    """Return ``(lhs, rhs)`` for the y_0/y_m equation; ``lhs`` is a callable of the ratio."""
    k = derive_constants(params)
    c = float(consumption.c(m))
    rhs = c / (c - params.r * m)
    return (lambda z: _lhs_4_13(z, k.B1, k.B2)), rhs


def solve_boundary(params: MarketParams, consumption: ConsumptionSpec, m: float) -> DualBoundary:
    """Solve the four boundary conditions for (y_m, y_0, D1, D2) at maximum wealth ``m``.

    The ratio z = y_0/y_m is bracketed on [1, Z] by doubling Z and then
    bisected in log space down to adjacent floating point numbers.
    """
    k = derive_constants(params)
    r = params.r
    c = float(consumption.c(m))
    if not (m > 0 and r * m < c):
        raise OutOfRegime(f"solve_boundary needs 0 < m < c(m)/r; got m={m}, c(m)/r={c / r}")
    rhs = c / (c - r * m)
    B1, B2 = k.B1, k.B2

    lo, hi = 1.0, 2.0
    while _lhs_4_13(hi, B1, B2) <= rhs:
        lo, hi = hi, 2.0 * hi
        if hi > Z_MAX:
            raise NoBracket(f"ratio y0/ym exceeds {Z_MAX:g} at m={m} (c(m) - r m = {c - r * m:g})")
    llo, lhi = math.log(lo), math.log(hi)
    for _ in range(200):
        mid = 0.5 * (llo + lhi)
        if mid in (llo, lhi):
            break
        if _lhs_4_13(math.exp(mid), B1, B2) > rhs:
            lhi = mid
        else:
            llo = mid
    zlo, zhi = math.exp(llo), math.exp(lhi)
    z = zlo if abs(_lhs_4_13(zlo, B1, B2) - rhs) <= abs(_lhs_4_13(zhi, B1, B2) - rhs) else zhi

    a1 = (1.0 - B2) / (B1 - B2)
    a2 = (B1 - 1.0) / (B1 - B2)
    shortfall = (c - r * m) / r  # c(m)/r - m
    bracket = a1 / B1 * z ** (B1 - 1.0) + a2 / B2 * z ** (B2 - 1.0)
    inv_y0 = c / r - shortfall * bracket
    if not inv_y0 > 0:
        raise NoBracket(f"1/y0 = {inv_y0:g} is not positive at m={m}")
    y0 = 1.0 / inv_y0
    ym = y0 / z
    log_ym = math.log(ym)
    try:
        D1 = -a1 / B1 * shortfall * math.exp((1.0 - B1) * log_ym)
        D2 = -a2 / B2 * shortfall * math.exp((1.0 - B2) * log_ym)
    except OverflowError:
        raise Unbounded(
            f"dual coefficients overflow double precision at m={m} (B1={B1:g}, y_m={ym:g})"
        ) from None
    return DualBoundary(y_m=ym, y_0=y0, D1=D1, D2=D2, m=float(m), c_of_m=c, r=r)


def dual_function(params: MarketParams, consumption: ConsumptionSpec, m: float) -> DualFunction:
    return DualFunction(solve_boundary(params, consumption, m), derive_constants(params))


def boundary_residuals(f: DualFunction) -> dict[str, float]:
    """Relative residuals of the four boundary rows and of the ratio equation."""
    b, k = f.boundary, f.constants
    y0, ym = b.y_0, b.y_m

    def rel(*terms):
        terms = [float(t) for t in terms]
        return abs(sum(terms)) / sum(abs(t) for t in terms)

    lhs = float(_lhs_4_13(b.ratio, k.B1, k.B2))
    rhs = b.c_of_m / (b.c_of_m - b.r * b.m)
    return {
        "value_at_y0": rel(_powterm(b.D1, k.B1, y0), _powterm(b.D2, k.B2, y0), b.c_over_r * y0, -1.0),
        "slope_at_y0": rel(
            _powterm(b.D1 * k.B1, k.B1 - 1, y0), _powterm(b.D2 * k.B2, k.B2 - 1, y0), b.c_over_r
        ),
        "slope_at_ym": rel(
            _powterm(b.D1 * k.B1, k.B1 - 1, ym), _powterm(b.D2 * k.B2, k.B2 - 1, ym), b.c_over_r, -b.m
        ),
        "curvature_at_ym": rel(
            _powterm(b.D1 * k.B1 * (k.B1 - 1), k.B1 - 2, ym),
            _powterm(b.D2 * k.B2 * (k.B2 - 1), k.B2 - 2, ym),
        ),
        "ratio_equation": abs(lhs - rhs) / rhs,
    }


def dual_value(f: DualFunction, y):
    """psi_hat(y) on [y_m, y_0]; raises :class:`DomainError` outside."""
    b = f.boundary
    y_arr = np.asarray(y, dtype=float)
    tol = 1e-12 * b.y_0
    if np.any(y_arr < b.y_m - tol) or np.any(y_arr > b.y_0 + tol):
        raise DomainError(f"dual variable outside [{b.y_m:g}, {b.y_0:g}]")
    return f.value(y)


def invert_dual(f: DualFunction, w):
    """Solve psi_hat'(y) = w for y in [y_m, y_0] (vectorised bisection in log y)."""
    b = f.boundary
    m = b.m
    w_arr = np.atleast_1d(np.asarray(w, dtype=float))
    tol_w = 1e-12 * max(1.0, m)
    if np.any(w_arr < -tol_w) or np.any(w_arr > m + tol_w) or not np.all(np.isfinite(w_arr)):
        raise DomainError(f"wealth must lie in [0, m={m:g}]")
    w_arr = np.clip(w_arr, 0.0, m)

    lo = np.full(w_arr.shape, math.log(b.y_m))
    hi = np.full(w_arr.shape, math.log(b.y_0))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        above = f.d1(np.exp(mid)) > w_arr
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    y_lo, y_hi = np.exp(lo), np.exp(hi)
    r_lo = np.abs(f.d1(y_lo) - w_arr)
    r_hi = np.abs(f.d1(y_hi) - w_arr)
    y = np.where(r_lo <= r_hi, y_lo, y_hi)
    y = np.where(w_arr == 0.0, b.y_0, y)
    y = np.where(w_arr == m, b.y_m, y)
    resid = np.abs(f.d1(y) - w_arr)
    if np.any(resid > tol_w):
        raise ConvergenceError(f"dual inversion residual {resid.max():.3g} exceeds {tol_w:.3g}")
    return y if np.ndim(w) else float(y[0])


def legendre(f: DualFunction, w):
    """Return ``(Psi(w), y*)`` where y* = invert_dual(f, w) = -Psi'(w)."""
    y = invert_dual(f, w)
    return f.value(y) - np.asarray(w, dtype=float) * y, y


def psi_blocked(f: DualFunction, w):
    """Minimum ruin probability for 0 <= w <= m when wealth is kept at or below m."""
    psi, _ = legendre(f, w)
    return psi if np.ndim(w) else float(psi)


def strategy_from_dual(f: DualFunction, y, params: MarketParams):
    """Risky investment -((mu - r)/sigma^2) * y * psi_hat''(y), with no domain checks."""
    return -params.merton_factor * np.asarray(y) * f.d2(y)


def pi_blocked(f: DualFunction, w, params: MarketParams):
    """Optimal amount in the risky asset for 0 < w < m."""
    m = f.boundary.m
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr <= 0) or np.any(w_arr >= m):
        raise OutOfRegime(f"pi_blocked is defined on the open interval (0, {m:g})")
    y = invert_dual(f, w)
    out = strategy_from_dual(f, y, params)
    return out if np.ndim(w) else float(out)


@dataclass(frozen=True)
class RatchetCondition:
    """Outcome of the no-ratchet test c(m) - m c'(m) <= lam / y_0, with both sides."""

    holds: bool
    lhs: float
    rhs: float
    y_0: float
    slope: float
    slope_threshold: float
    psi_prime_at_zero: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def ratchet_condition(params: MarketParams, consumption: ConsumptionSpec, m: float) -> RatchetCondition:
    """Decide whether holding wealth at or below ``m`` is optimal.

    The test is evaluated twice, once as c(m) - m c'(m) <= lam/y_0 and once in
    the slope form c'(m) >= (c(m) + lam/Psi'(0))/m with Psi'(0) taken from the
    dual inversion at w = 0; the two verdicts must agree away from the knife edge.
    """
    consumption.require_increasing()
    f = dual_function(params, consumption, m)
    c = float(consumption.c(m))
    dc = float(consumption.dc(m))
    y0 = f.boundary.y_0
    lhs = c - m * dc
    rhs = params.lam / y0
    holds = lhs <= rhs

    psi_prime_0 = -invert_dual(f, 0.0)
    threshold = (c + params.lam / psi_prime_0) / m
    holds_slope_form = dc >= threshold
    if holds != holds_slope_form and abs(lhs - rhs) > 1e-12 * max(abs(lhs), abs(rhs), c):
        raise ConvergenceError(
            f"ratchet test forms disagree at m={m}: gap {lhs - rhs:g}, slope gap {dc - threshold:g}"
        )
    return RatchetCondition(
        holds=bool(holds),
        lhs=lhs,
        rhs=rhs,
        y_0=y0,
        slope=dc,
        slope_threshold=threshold,
        psi_prime_at_zero=psi_prime_0,
    )


@dataclass(frozen=True)
class MStarSearch:
    """Where ratcheting stops being optimal, and why."""

    m_star: float
    binding: str  # "condition" or "safe_level"
    m0: float
    bracket: tuple[float, float]
    certificate: dict = field(default_factory=dict)


def _stop_margins(params: MarketParams, consumption: ConsumptionSpec, m: float) -> tuple[float, float]:
    """(m - c(m)/r, c(m) - m c'(m) - lam/y0); the second is nan at or above the safe level."""
    c = float(consumption.c(m))
    safe_margin = m - c / params.r
    if safe_margin >= 0:
        return safe_margin, math.nan
    y0 = solve_boundary(params, consumption, m).y_0
    return safe_margin, c - m * float(consumption.dc(m)) - params.lam / y0


def _stops(margins: tuple[float, float]) -> bool:
    safe_margin, gap = margins
    return safe_margin >= 0 or gap <= 0


def find_m_star(
    params: MarketParams,
    consumption: ConsumptionSpec,
    m0: float,
    grid_factor: float = 1.05,
    m_max: float | None = None,
    tol: float | None = None,
) -> MStarSearch:
    """Smallest m > m0 at which m >= c(m)/r or the no-ratchet test holds again.

    A geometric grid with ratio ``grid_factor`` locates the first sign change of
    the stopping predicate, which is then bisected to ``tol`` (default 1e-8 * m0).
    """
    consumption.require_increasing()
    if not m0 * params.r < float(consumption.c(m0)):
        raise OutOfRegime(f"m* needs m0 < c(m0)/r; m0={m0} is at or above the safe level")
    if ratchet_condition(params, consumption, m0).holds:
        raise OutOfRegime(f"ratcheting is not optimal at m0={m0}; m* is undefined")
    if grid_factor <= 1.0:
        raise ValueError("grid_factor must exceed 1")
    m_max = 1e6 * m0 if m_max is None else m_max
    tol = 1e-8 * m0 if tol is None else tol

    lo = m0
    hi = m0 * grid_factor
    while not _stops(_stop_margins(params, consumption, hi)):
        lo = hi
        hi *= grid_factor
        if hi > m_max:
            raise Unbounded(f"no stopping level found below m_max={m_max:g}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _stops(_stop_margins(params, consumption, mid)):
            hi = mid
        else:
            lo = mid

    binding = "safe_level" if hi * params.r >= float(consumption.c(hi)) else "condition"
    m_star = hi
    if binding == "safe_level":
        # pin the crossing c(m) = r m itself; it is bracketed by [lo, hi]
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid in (a, b):
                break
            if mid * params.r >= float(consumption.c(mid)):
                b = mid
            else:
                a = mid
        m_star = b

    eps = 1e-6 * m0
    below = _stop_margins(params, consumption, max(m_star - eps, 0.5 * (m0 + m_star)))
    above = _stop_margins(params, consumption, m_star + eps)
    certificate = {
        "probe": eps,
        "safe_margin_below": below[0],
        "safe_margin_above": above[0],
        "gap_below": below[1],
        "gap_above": above[1],
    }
    return MStarSearch(m_star=m_star, binding=binding, m0=m0, bracket=(lo, hi), certificate=certificate)


def m_star(
    params: MarketParams,
    consumption: ConsumptionSpec,
    m0: float,
    grid_factor: float = 1.05,
    m_max: float | None = None,
) -> float:
    return find_m_star(params, consumption, m0, grid_factor=grid_factor, m_max=m_max).m_star


def margin_profile(
    params: MarketParams, consumption: ConsumptionSpec, lo: float, hi: float, n: int = 21
) -> list[dict]:
    """Stopping-predicate margins on an even grid of [lo, hi] (for reporting)."""
    rows = []
    for m in np.linspace(lo, hi, n):
        safe_margin, gap = _stop_margins(params, consumption, float(m))
        rows.append({"m": float(m), "safe_margin": safe_margin, "condition_gap": gap})
    return rows
