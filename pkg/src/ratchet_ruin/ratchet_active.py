"""Moving free boundary when it is optimal to let wealth push maximum wealth up.

On ``[m0, m*]`` the dual keeps the form

    psi_tilde(y, m) = D1(m) * y**B1 + D2(m) * y**B2 + (c(m)/r) * y,

but the coefficients now move with ``m``.  Value 1 and slope 0 at ``y0(m)``
fix D1 and D2 in terms of ``y0(m)``; slope ``m`` at ``ym(m)`` is an algebraic
constraint tying ``ym`` to ``y0``; and psi_tilde_m(ym(m), m) = 0 gives an ODE
for ``y0``.

Internally the stopping boundary is carried as

    theta = ln(1 + eta),    y0 = (gamma r / c(m)) * (1 + eta),

because D2 and the ym**(B2 - 1) term of the slope constraint are exactly
proportional to ``eta``.  Near the safe level ``eta`` is tiny and computing it
as a difference of two nearly equal y0 values would lose every digit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .closed_form import fixed_max_solution, psi_fixed_max
from .errors import DomainError, InvalidParams, NoRoot, OutOfRegime, SingularDerivative
from .model import ConsumptionSpec, DerivedConstants, MarketParams, derive_constants
from .ratchet_blocked import (
    DualBoundary,
    DualFunction,
    find_m_star,
    invert_dual,
    psi_blocked,
    solve_boundary,
    strategy_from_dual,
)

SCHEMA_VERSION = 1
U_MIN = 1e-12
TANGENT_TOL = 1e-10
# trial states inside a Runge-Kutta step may miss the double root at m* slightly
STAGE_TANGENT_TOL = 1e-3
# a constraint value this close to zero at the curvature peak is rounding noise
FOLD_ROUNDING = 1e-14


def coefficients_from_y0(k: DerivedConstants, c: float, r: float, y0: float) -> tuple[float, float]:
    """D1, D2 such that psi_tilde(y0) = 1 and psi_tilde_y(y0) = 0 (direct form)."""
    B1, B2 = k.B1, k.B2
    span = B1 - B2
    ly = math.log(y0)
    D1 = -B2 / span * math.exp(-B1 * ly) - (c / r) * (1.0 - B2) / span * math.exp((1.0 - B1) * ly)
    D2 = B1 / span * math.exp(-B2 * ly) - (c / r) * (B1 - 1.0) / span * math.exp((1.0 - B2) * ly)
    return D1, D2


@dataclass(frozen=True)
class _Level:
    """Everything that depends on (m, theta) alone."""

    k: DerivedConstants
    m: float
    c: float
    dc: float
    r: float
    theta: float

    @property
    def eta(self) -> float:
        return math.expm1(self.theta)

    @property
    def y0(self) -> float:
        return self.k.gamma * self.r / self.c * math.exp(self.theta)

    @property
    def shortfall(self) -> float:
        """(c(m) - r m) / r."""
        return (self.c - self.r * self.m) / self.r

    @property
    def a_coef(self) -> float:
        k = self.k
        return k.B2 + k.gamma * math.exp(self.theta) * (1.0 - k.B2)

    def coefficients(self) -> tuple[float, float]:
        k = self.k
        span = k.B1 - k.B2
        ly = math.log(self.y0)
        D1 = -math.exp(-k.B1 * ly) / span * self.a_coef
        D2 = -k.B1 * self.eta * math.exp(-k.B2 * ly) / span
        return D1, D2

    def constraint(self, u):
        """Slope constraint at ratio u = ym/y0, relative to (c - r m)/r; zero at ym."""
        k = self.k
        lu = np.log(u)
        p1 = np.exp((k.B1 - 1.0) * lu)
        p2 = np.exp((k.B2 - 1.0) * lu)
        e = k.B1 / ((k.B1 - k.B2) * self.y0) * (self.a_coef * p1 + k.B2 * self.eta * p2)
        s = self.shortfall
        return (e - s) / s

    def peak(self) -> float | None:
        """Ratio at which psi_tilde_yy vanishes (exists only for eta < 0)."""
        k = self.k
        eta = self.eta
        if not eta < 0:
            return None
        log_u = (
            math.log(k.B2 * (k.B2 - 1.0) * -eta) - math.log(self.a_coef * (k.B1 - 1.0))
        ) / (k.B1 - k.B2)
        return math.exp(log_u)

    def log_slope(self, u: float) -> float:
        """d ln y0 / dm given the ratio u."""
        k = self.k
        span = k.B1 - k.B2
        p1 = u ** (k.B1 - 1.0)
        p2 = u ** (k.B2 - 1.0)
        coef = (p1 - p2) * k.B1 / span * (1.0 + self.eta * (1.0 - k.B2))
        if abs(coef) < 1e-14:
            raise SingularDerivative(f"y0 equation is singular at m={self.m} (coefficient {coef:.3g})")
        q = (1.0 - k.B2) / span * p1 + (k.B1 - 1.0) / span * p2
        return k.gamma * math.exp(self.theta) * (self.dc / self.c) * (q - 1.0) / coef


def _level(params: MarketParams, consumption: ConsumptionSpec, k: DerivedConstants, m: float, theta: float) -> _Level:
    return _Level(k, float(m), float(consumption.c(m)), float(consumption.dc(m)), params.r, float(theta))


def _theta_of_y0(k: DerivedConstants, c: float, r: float, y0: float) -> float:
    return math.log(y0 * c / (k.gamma * r))


def _solve_ratio(lv: _Level, tangent_tol: float = TANGENT_TOL) -> float:
    if not lv.shortfall > 0:
        raise OutOfRegime(f"need 0 < m < c(m)/r; got m={lv.m}, c(m)/r={lv.c / lv.r}")

    def g(lu: float) -> float:
        return float(lv.constraint(math.exp(lu)))

    lo = math.log(U_MIN)
    up = lv.peak()
    if up is not None:
        if up >= 1.0:
            raise NoRoot(f"slope constraint has no root below y0 at m={lv.m}")
        if up > U_MIN:
            lo = math.log(up)
            g_peak = g(lo)
            if abs(g_peak) <= FOLD_ROUNDING:
                # roots merged to within rounding: the peak is the double root
                return up
            if g_peak >= 0.0:
                if g_peak <= tangent_tol:
                    return up
                raise NoRoot(f"slope constraint has no root at m={lv.m} (minimum {g_peak:.3g})")
    if g(lo) > 0.0:
        raise NoRoot(f"no ratio in ({U_MIN:g}, 1) satisfies the slope constraint at m={lv.m}")
    # at u = 1 the constraint equals m / ((c - r m)/r) > 0
    lu = brentq(g, lo, 0.0, xtol=1e-15, rtol=1e-15, maxiter=200)
    return math.exp(lu)


def solve_ratio_given_y0(
    params: MarketParams,
    consumption: ConsumptionSpec,
    m: float,
    y0: float,
    *,
    tangent_tol: float = TANGENT_TOL,
) -> float:
    """Ratio u = ym/y0 in (0, 1) solving the slope constraint; the larger root is taken.

    Where the two roots merge the constraint only touches zero at the
    curvature peak; a peak value within ``tangent_tol`` of zero is accepted as
    that double root.
    """
    k = derive_constants(params)
    c = float(consumption.c(m))
    if not (m > 0 and params.r * m < c):
        raise OutOfRegime(f"need 0 < m < c(m)/r; got m={m}, c(m)/r={c / params.r}")
    if not y0 > 0:
        raise DomainError(f"y0 must be positive, got {y0}")
    lv = _level(params, consumption, k, m, _theta_of_y0(k, c, params.r, y0))
    return _solve_ratio(lv, tangent_tol)


def solve_ym_given_y0(
    params: MarketParams, consumption: ConsumptionSpec, m: float, y0: float
) -> float:
    """Reflecting boundary ym in (0, y0) consistent with stopping boundary y0 at level m."""
    return y0 * solve_ratio_given_y0(params, consumption, m, y0)


def constraint_residual(
    params: MarketParams, consumption: ConsumptionSpec, m: float, y0: float, ym: float
) -> float:
    """Relative residual of the slope constraint at (m, y0, ym)."""
    k = derive_constants(params)
    c = float(consumption.c(m))
    lv = _level(params, consumption, k, m, _theta_of_y0(k, c, params.r, y0))
    return abs(float(lv.constraint(ym / y0)))


def y0_derivative(
    params: MarketParams,
    consumption: ConsumptionSpec,
    m: float,
    y0: float,
    ym: float,
) -> float:
    """d y0 / d m along the moving boundary.

    At the safe level itself (``ym == 0``) the boundary degenerates to the
    fixed-consumption solution with y0 = gamma r / c(m), and the limit
    -y0 c'(m)/c(m) is returned.
    """
    k = derive_constants(params)
    c = float(consumption.c(m))
    if ym == 0.0:
        return -y0 * float(consumption.dc(m)) / c
    lv = _level(params, consumption, k, m, _theta_of_y0(k, c, params.r, y0))
    return y0 * lv.log_slope(ym / y0)


def _theta_rate(params, consumption, k, m: float, theta: float, tangent_tol: float = STAGE_TANGENT_TOL) -> float:
    """d theta / dm = d ln y0 / dm + c'(m)/c(m)."""
    lv = _level(params, consumption, k, m, theta)
    if not lv.shortfall > 0:
        return 0.0
    try:
        u = _solve_ratio(lv, tangent_tol)
    except NoRoot as exc:
        raise NoRoot(f"{exc} (while integrating at m={m:.12g})") from None
    return lv.log_slope(u) + lv.dc / lv.c


def _rk4_step(rate, m: float, x: float, step: float) -> float:
    """One classical Runge-Kutta step of dx/dm = rate(m, x); ``step`` may be negative."""
    k1 = rate(m, x)
    k2 = rate(m + step / 2, x + step / 2 * k1)
    k3 = rate(m + step / 2, x + step / 2 * k2)
    k4 = rate(m + step, x + step * k3)
    return x + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass(frozen=True)
class _Node:
    m: float
    theta: float
    y0: float
    ym: float
    D1: float
    D2: float
    residual: float


def _node(params, consumption, k, m: float, theta: float, u: float | None = None) -> _Node:
    lv = _level(params, consumption, k, m, theta)
    if u is None:
        u = _solve_ratio(lv)
    D1, D2 = lv.coefficients()
    res = abs(float(lv.constraint(u))) if u > 0 else 0.0
    return _Node(lv.m, theta, lv.y0, lv.y0 * u, D1, D2, res)


@dataclass(frozen=True)
class MovingBoundary:
    """Tabulated moving boundary on ``[m0, m_star]`` (nodes ascending in m)."""

    params: MarketParams
    consumption: ConsumptionSpec
    m_grid: np.ndarray
    theta_of_m: np.ndarray
    y0_of_m: np.ndarray
    ym_of_m: np.ndarray
    D1t_of_m: np.ndarray
    D2t_of_m: np.ndarray
    binding: str
    residuals: np.ndarray
    _interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)

    @property
    def m0(self) -> float:
        return float(self.m_grid[0])

    @property
    def m_star(self) -> float:
        return float(self.m_grid[-1])

    @property
    def degenerate_terminal(self) -> bool:
        """True when m* is the safe level, where ym collapses to 0."""
        return self.binding == "safe_level"

    @property
    def last_regular_m(self) -> float:
        """Largest node with ym > 0."""
        regular = self.m_grid[self.ym_of_m > 0]
        return float(regular[-1]) if regular.size else self.m0

    def _check(self, m: float) -> None:
        slack = 1e-12 * max(self.m_star, 1.0)
        if not (self.m0 - slack <= m <= self.m_star + slack):
            raise DomainError(f"m={m} outside [{self.m0:.12g}, {self.m_star:.12g}]")

    def theta_at(self, m: float) -> float:
        self._check(m)
        if self._interp is None:
            return float(self.theta_of_m[0])
        return float(self._interp(min(max(m, self.m0), self.m_star)))

    def y0_at(self, m: float) -> float:
        k = derive_constants(self.params)
        return k.gamma * self.params.r / float(self.consumption.c(m)) * math.exp(self.theta_at(m))

    def slice_at(self, m: float) -> DualBoundary:
        """Boundary data at level m, with ym re-solved from the slope constraint.

        Past the last regular node of a safe-level boundary the stopping
        boundary is within rounding of gamma r / c(m) and the
        fixed-consumption dual (ym = 0, D2 = 0) is returned.
        """
        self._check(m)
        k = derive_constants(self.params)
        r = self.params.r
        m = float(m)
        if self.degenerate_terminal and m > self.last_regular_m:
            lv = _level(self.params, self.consumption, k, m, 0.0)
            D1, _ = lv.coefficients()
            return DualBoundary(y_m=0.0, y_0=lv.y0, D1=D1, D2=0.0, m=m, c_of_m=lv.c, r=r)
        if m >= self.m_star:
            return DualBoundary(
                y_m=float(self.ym_of_m[-1]),
                y_0=float(self.y0_of_m[-1]),
                D1=float(self.D1t_of_m[-1]),
                D2=float(self.D2t_of_m[-1]),
                m=m,
                c_of_m=float(self.consumption.c(m)),
                r=r,
            )
        theta = self.theta_at(m)
        try:
            node = _node(self.params, self.consumption, k, m, theta)
        except NoRoot:
            # between nodes next to a fold the interpolant can step just past it;
            # take the curvature peak as the double root, as the integrator does
            lv = _level(self.params, self.consumption, k, m, theta)
            try:
                node = _node(self.params, self.consumption, k, m, theta, _solve_ratio(lv, STAGE_TANGENT_TOL))
            except NoRoot:
                if not self.degenerate_terminal:
                    raise
                node = _node(self.params, self.consumption, k, m, fold_theta(self.params, self.consumption, m))
        return DualBoundary(
            y_m=node.ym,
            y_0=node.y0,
            D1=node.D1,
            D2=node.D2,
            m=m,
            c_of_m=float(self.consumption.c(m)),
            r=r,
        )

    def dual_at(self, m: float) -> DualFunction:
        return DualFunction(self.slice_at(m), derive_constants(self.params))

    def to_json(self) -> str:
        doc = {
            "schema": "ratchet_ruin.moving_boundary",
            "version": SCHEMA_VERSION,
            "params": self.params.to_dict(),
            "consumption": self.consumption.to_dict(),
            "binding": self.binding,
            "nodes": {
                "m": self.m_grid.tolist(),
                "theta": self.theta_of_m.tolist(),
                "y0": self.y0_of_m.tolist(),
                "ym": self.ym_of_m.tolist(),
                "D1": self.D1t_of_m.tolist(),
                "D2": self.D2t_of_m.tolist(),
                "constraint_residual": self.residuals.tolist(),
            },
            "diagnostics": {
                "n_nodes": int(self.m_grid.size),
                "max_constraint_residual": float(self.residuals.max()),
            },
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MovingBoundary":
        doc = json.loads(text)
        if doc.get("schema") != "ratchet_ruin.moving_boundary":
            raise InvalidParams("not a moving-boundary document")
        if doc.get("version") != SCHEMA_VERSION:
            raise InvalidParams(f"unsupported moving-boundary version {doc.get('version')!r}")
        nodes = doc["nodes"]
        cols = [np.array(nodes[key], dtype=float) for key in ("m", "theta", "y0", "ym", "D1", "D2")]
        return _build(
            MarketParams(**doc["params"]),
            ConsumptionSpec.from_dict(doc["consumption"]),
            cols,
            doc["binding"],
            np.array(nodes["constraint_residual"], dtype=float),
        )


def _build(params, consumption, cols, binding, residuals) -> MovingBoundary:
    m, theta = cols[0], cols[1]
    interp = PchipInterpolator(m, theta) if m.size > 1 else None
    return MovingBoundary(params, consumption, *cols, binding, residuals, _interp=interp)


def _from_nodes(params, consumption, nodes: list[_Node], binding: str) -> MovingBoundary:
    cols = [np.array([getattr(n, f) for n in nodes]) for f in ("m", "theta", "y0", "ym", "D1", "D2")]
    return _build(params, consumption, cols, binding, np.array([n.residual for n in nodes]))


def _integrate_from_fold(params, consumption, k, m0, m_star, n_min) -> list[_Node]:
    """Backward RK4 from a terminal point where the slope constraint has a double root."""
    b = solve_boundary(params, consumption, m_star)
    theta = _theta_of_y0(k, b.c_of_m, params.r, b.y_0)
    nodes = [_node(params, consumption, k, m_star, theta, b.y_m / b.y_0)]
    if m_star - m0 <= 1e-14 * max(1.0, m_star):
        return nodes

    def rate(mm: float, x: float) -> float:
        return _theta_rate(params, consumption, k, mm, x)

    h_max = (m_star - m0) / n_min
    h_min = 1e-10 * (m_star - m0)
    h = h_max
    m = m_star
    while m - m0 > 1e-13 * m_star:
        step = min(h, m - m0)
        theta_new = _rk4_step(rate, m, theta, -step)
        m_new = m - step if step < m - m0 else m0
        node = _node(params, consumption, k, m_new, theta_new)
        if abs(node.ym / nodes[-1].ym - 1.0) > 0.05 and step > h_min:
            h = step / 2
            continue
        nodes.append(node)
        m, theta = m_new, theta_new
        h = min(2.0 * step, h_max)
    return nodes[::-1]


def _safe_level_grid(m0: float, m_hat: float, n_min: int, n_tail: int = 12) -> np.ndarray:
    """Even grid on [m0, m_hat - h] followed by halvings toward m_hat."""
    h = (m_hat - m0) / n_min
    body = m0 + h * np.arange(n_min)
    tail = m_hat - h * 0.5 ** np.arange(1, n_tail + 1)
    return np.concatenate([body, tail])


def _peak_gap(lv: _Level) -> float:
    """Constraint value at the curvature peak; negative when a root exists."""
    up = lv.peak()
    if up is None or up <= U_MIN:
        return -1.0
    if up >= 1.0:
        return 1.0
    return float(lv.constraint(up))


def fold_theta(params: MarketParams, consumption: ConsumptionSpec, m: float) -> float:
    """Smallest theta at level m for which the slope constraint still has a root.

    There the two roots merge at the curvature peak, so psi_tilde_yy(ym) = 0.
    """
    k = derive_constants(params)

    def gap(theta: float) -> float:
        return _peak_gap(_level(params, consumption, k, m, theta))

    hi = -1e-300
    lo = -1e-30
    while gap(lo) < 0.0:
        hi, lo = lo, 4.0 * lo
        if lo < -1.0:
            raise NoRoot(f"fold of the slope constraint not found at m={m}")
    return brentq(gap, lo, hi, xtol=1e-300, rtol=1e-15)


def _shoot(params, consumption, k, grid: np.ndarray, theta_start: float):
    """Integrate theta forward over ``grid`` from theta(grid[0]) = theta_start.

    Returns ``(verdict, nodes)`` with verdict "low" when the slope constraint
    loses its root (the path ran into the fold), "high" when theta reaches 0
    (from where it can only grow, so ym cannot vanish at the safe level), and
    "open" when neither happened on the grid.
    """

    def rate(mm: float, x: float) -> float:
        return _theta_rate(params, consumption, k, mm, x)

    theta = theta_start
    nodes: list[_Node] = []
    for i, m in enumerate(grid):
        try:
            if i > 0:
                theta = _rk4_step(rate, grid[i - 1], theta, m - grid[i - 1])
            if theta >= 0.0:
                return "high", nodes
            nodes.append(_node(params, consumption, k, float(m), theta))
        except NoRoot:
            return "low", nodes
    return "open", nodes


def _integrate_to_safe_level(params, consumption, k, m0, m_hat, n_min) -> list[_Node]:
    """Shooting on theta(m0) for the path that ends at the safe level with ym -> 0.

    Paths that start too low run into the fold of the slope constraint before
    m_hat; paths that start too high end with a positive ym at m_hat, which
    would give a negative ruin probability at the safe level.  Bisection
    between the two classes converges on the separating path.  Forward
    integration amplifies rounding, so even the best starting value leaves
    that path shortly before m_hat; from there on the path is within
    rounding of the fold, and fold points are used as nodes.
    """
    grid = _safe_level_grid(m0, m_hat, n_min)
    b0 = solve_boundary(params, consumption, m0)
    lo = _theta_of_y0(k, b0.c_of_m, params.r, b0.y_0)
    hi = 0.0
    verdict, best = _shoot(params, consumption, k, grid, lo)
    if verdict != "low":
        raise NoRoot(f"could not bracket the boundary at m0={m0}: the capped-wealth y0 is not too low")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        verdict, nodes = _shoot(params, consumption, k, grid, mid)
        if verdict == "low":
            lo, best = mid, nodes
        elif verdict == "high":
            hi = mid
        else:
            best = nodes
            break
    for m in grid[len(best):]:
        best.append(_node(params, consumption, k, float(m), fold_theta(params, consumption, float(m))))
    return best + [_node(params, consumption, k, m_hat, 0.0, 0.0)]


def integrate_boundaries(
    params: MarketParams,
    consumption: ConsumptionSpec,
    m0: float,
    m_star: float | None = None,
    *,
    n_min: int = 200,
    binding: str | None = None,
) -> MovingBoundary:
    """Tabulate the moving boundary on ``[m0, m_star]``.

    ``m_star`` and its binding condition come from :func:`find_m_star` when
    not supplied.

    When the no-ratchet test binds at ``m_star`` the slope constraint has a
    double root there and the boundary is integrated backward with classical
    RK4, step at most (m_star - m0)/n_min, halving a step whenever ym moves by
    more than 5 %.

    When ``m_star`` is the safe level the endpoint is degenerate (ym = 0) and
    backward steps leave the set where the slope constraint is solvable, so
    the same RK4 scheme is run forward from ``m0`` and the starting value is
    found by shooting.  The last node is the degenerate endpoint.
    """
    consumption.require_increasing()
    k = derive_constants(params)
    if m_star is None or binding is None:
        search = find_m_star(params, consumption, m0)
        m_star = search.m_star if m_star is None else m_star
        binding = search.binding if binding is None else binding
    if m_star < m0:
        raise DomainError(f"m_star={m_star} lies below m0={m0}")
    if binding == "condition":
        nodes = _integrate_from_fold(params, consumption, k, m0, m_star, n_min)
    elif binding == "safe_level":
        nodes = _integrate_to_safe_level(params, consumption, k, m0, m_star, n_min)
    else:
        raise InvalidParams(f"unknown binding {binding!r}")
    return _from_nodes(params, consumption, nodes, binding)


def coefficients_at(mb: MovingBoundary, m: float) -> tuple[float, float]:
    """(D1(m), D2(m)) from the interpolated stopping boundary y0(m)."""
    b = mb.slice_at(m)
    return b.D1, b.D2


def _resolve(mb: MovingBoundary, params, consumption) -> None:
    if params is not None and params != mb.params:
        raise InvalidParams("market parameters differ from those of the moving boundary")
    if consumption is not None and consumption != mb.consumption:
        raise InvalidParams("consumption differs from that of the moving boundary")


def psi_active(
    mb: MovingBoundary,
    w,
    m: float,
    params: MarketParams | None = None,
    consumption: ConsumptionSpec | None = None,
):
    """Minimum ruin probability at (w, m) for m in [m0, m*] and 0 <= w <= m."""
    _resolve(mb, params, consumption)
    b = mb.slice_at(m)
    if b.y_m == 0.0:
        w_arr = np.asarray(w, dtype=float)
        if np.any(w_arr < 0) or np.any(w_arr > m):
            raise DomainError(f"wealth must lie in [0, m={m:g}]")
        sol = fixed_max_solution(mb.params, mb.consumption, m, check_regime=False)
        return psi_fixed_max(sol, w)
    return psi_blocked(DualFunction(b, derive_constants(mb.params)), w)


def pi_active(
    mb: MovingBoundary,
    w,
    m: float,
    params: MarketParams | None = None,
    consumption: ConsumptionSpec | None = None,
):
    """Optimal risky investment at (w, m) for 0 < w <= m.

    At w = m the value is the investment that pushes wealth through the
    current maximum; it is 0 only at m = m*.
    """
    _resolve(mb, params, consumption)
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr <= 0) or np.any(w_arr > m):
        raise OutOfRegime(f"pi_active is defined for 0 < w <= m={m:g}")
    b = mb.slice_at(m)
    if b.y_m == 0.0:
        sol = fixed_max_solution(mb.params, mb.consumption, m, check_regime=False)
        gap = np.maximum(sol.safe_level - w_arr, 0.0)
        out = mb.params.merton_factor / (sol.gamma - 1.0) * gap
        return out if np.ndim(w) else float(out)
    f = DualFunction(b, derive_constants(mb.params))
    y = invert_dual(f, w)
    out = strategy_from_dual(f, y, mb.params)
    return out if np.ndim(w) else float(out)


def psi_m_on_diagonal(mb: MovingBoundary, m: float, rel_step: float = 1e-5) -> float:
    """Central-difference d psi / d m at w = m, holding w fixed.

    By the envelope property this equals d psi_tilde / d m at the fixed dual
    point y = ym(m), so both shifted slices are evaluated at that same y.
    """
    h = rel_step * m
    k = derive_constants(mb.params)
    y = mb.slice_at(m).y_m

    def dual_at(mm: float) -> float:
        return float(DualFunction(mb.slice_at(mm), k).value(y))

    lo, hi = max(m - h, mb.m0), min(m + h, mb.m_star)
    return (dual_at(hi) - dual_at(lo)) / (hi - lo)


__all__ = [
    "MovingBoundary",
    "coefficients_at",
    "coefficients_from_y0",
    "constraint_residual",
    "fold_theta",
    "integrate_boundaries",
    "pi_active",
    "psi_active",
    "psi_m_on_diagonal",
    "solve_ratio_given_y0",
    "solve_ym_given_y0",
    "y0_derivative",
]
