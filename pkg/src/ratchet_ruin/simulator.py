"""Monte Carlo estimate of the probability of lifetime ruin under a feedback strategy.

Wealth follows

    dW = (r W + (mu - r) pi(W, M) - c(M)) dt + sigma pi(W, M) dB,

with M the running maximum of W.  Paths are grouped in fixed-size blocks; each
block owns a PCG64 stream spawned from ``(seed, block index)`` and the block
sums are reduced in block order, so the result does not depend on how many
worker threads run the blocks.

Two estimators are available.  ``death_clock`` draws the exponential death
time of every path and counts ruin before death; ``discounted`` never samples
death and scores exp(-lam tau) at the ruin time tau instead.  Both are
unbiased for the same quantity.  The death clock stops each path at death,
after 1/lam years on average, while the discounted weight needs every
surviving path to be run to ``t_max``.

Within a step, a crossing of zero that both endpoints miss is handled by its
Brownian-bridge probability: the path keeps running with its survival weight
reduced and the crossed mass is scored, which needs no extra random numbers.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .errors import InvalidParams, SchemeMismatch
from .model import (
    Affine,
    AgentState,
    ConsumptionSpec,
    MarketParams,
    Power,
    Regime,
    classify_regime,
    derive_constants,
)
from .ratchet_blocked import DualFunction, dual_function, invert_dual, strategy_from_dual

BLOCK_SIZE = 2048
TAIL_PROBABILITY = 1e-6
# bridge crossing probabilities below exp(-BRIDGE_CUTOFF) are ignored
BRIDGE_CUTOFF = 40.0

# path status codes
ALIVE, RUINED, SAFE, DIED, TRUNCATED = 0, 1, 2, 3, 4
# strategy kinds understood by the kernel
K_FIXED_MAX, K_CONST_AMOUNT, K_CONST_PROP, K_TABLE = 0, 1, 2, 3


class Scheme(str, enum.Enum):
    EULER_MARUYAMA = "EulerMaruyama"
    EXACT_SHORTFALL_GBM = "ExactShortfallGBM"

    def __str__(self) -> str:
        return self.value


class Estimator(str, enum.Enum):
    DEATH_CLOCK = "death_clock"
    DISCOUNTED = "discounted"

    def __str__(self) -> str:
        return self.value


def default_t_max(lam: float) -> float:
    """Smallest horizon with exp(-lam t_max) just below 1e-6."""
    return (math.log(1.0 / TAIL_PROBABILITY) + 1e-9) / lam


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; ``t_max=None`` resolves to :func:`default_t_max`."""

    dt: float = 1e-3
    n_paths: int = 200_000
    t_max: float | None = None
    seed: int = 0
    scheme: Scheme = Scheme.EULER_MARUYAMA
    estimator: Estimator = Estimator.DEATH_CLOCK
    workers: int = 1
    block_size: int = BLOCK_SIZE

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "estimator", Estimator(self.estimator))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidParams(f"dt must be positive, got {self.dt}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise InvalidParams(f"n_paths must be a positive integer, got {self.n_paths}")
        if self.t_max is not None and not (math.isfinite(self.t_max) and self.t_max > 0):
            raise InvalidParams(f"t_max must be positive, got {self.t_max}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParams(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.workers < 1 or self.block_size < 1:
            raise InvalidParams("workers and block_size must be positive")

    def resolved_t_max(self, params: MarketParams) -> float:
        return default_t_max(params.lam) if self.t_max is None else float(self.t_max)

    def to_dict(self, params: MarketParams | None = None) -> dict:
        out = asdict(self)
        out["scheme"] = str(self.scheme)
        out["estimator"] = str(self.estimator)
        if params is not None:
            out["t_max"] = self.resolved_t_max(params)
        # thread count never changes the result
        out.pop("workers")
        return out


class Strategy:
    """Base class for feedback strategies pi(w, m)."""

    name: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, **{k: v for k, v in self.__dict__.items() if _plain(v)}}


def _plain(v) -> bool:
    return v is None or isinstance(v, (int, float, str))


@dataclass(frozen=True)
class FixedMax(Strategy):
    """((mu - r)/sigma^2)/(gamma - 1) * (c(M)/r - w), zero at and above the safe level."""

    name = "FixedMax"


@dataclass(frozen=True)
class Blocked(Strategy):
    """Optimal strategy when wealth is held at or below ``m`` (the state's m by default)."""

    m: float | None = None
    n_table: int = 2049
    name = "Blocked"


@dataclass(frozen=True)
class Active(Strategy):
    """Optimal strategy on [m0, m*] read from a moving boundary, the blocked one at m* after."""

    boundary: object = field(default=None, repr=False, compare=False)
    n_m: int = 257
    n_table: int = 1025
    name = "Active"


@dataclass(frozen=True)
class ConstantAmount(Strategy):
    amount: float
    name = "ConstantAmount"


@dataclass(frozen=True)
class ConstantProportion(Strategy):
    fraction: float
    name = "ConstantProportion"


STRATEGIES = {cls.name: cls for cls in (FixedMax, Blocked, Active, ConstantAmount, ConstantProportion)}


@dataclass(frozen=True)
class RuinEstimate:
    point: float
    std_error: float
    truncation_bias_bound: float
    n_ruined: int
    n_safe_absorbed: int
    n_truncated: int
    n_died: int
    n_paths: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _Compiled:
    kind: int
    args: np.ndarray
    table: np.ndarray
    m_lo: float
    m_scale: float


def _x_grid(n: int) -> np.ndarray:
    # x = sqrt((m - w)/m); the optimal strategies behave like sqrt(m - w) near w = m
    return np.linspace(0.0, 1.0, n)


def _row_from_dual(f: DualFunction, params: MarketParams, x: np.ndarray) -> np.ndarray:
    m = f.boundary.m
    w = np.clip(m * (1.0 - x * x), 0.0, m)
    return np.maximum(strategy_from_dual(f, invert_dual(f, w), params), 0.0)


def _compile(strategy: Strategy, params: MarketParams, consumption: ConsumptionSpec, state: AgentState) -> _Compiled:
    empty = np.zeros((1, 1))
    if isinstance(strategy, FixedMax):
        k = params.merton_factor / (derive_constants(params).gamma - 1.0)
        return _Compiled(K_FIXED_MAX, np.array([k]), empty, 0.0, 0.0)
    if isinstance(strategy, ConstantAmount):
        return _Compiled(K_CONST_AMOUNT, np.array([float(strategy.amount)]), empty, 0.0, 0.0)
    if isinstance(strategy, ConstantProportion):
        return _Compiled(K_CONST_PROP, np.array([float(strategy.fraction)]), empty, 0.0, 0.0)
    if isinstance(strategy, Blocked):
        m = state.m if strategy.m is None else float(strategy.m)
        f = dual_function(params, consumption, m)
        row = _row_from_dual(f, params, _x_grid(strategy.n_table))
        return _Compiled(K_TABLE, np.array([1.0 / m]), row[None, :], m, 0.0)
    if isinstance(strategy, Active):
        from .ratchet_active import MovingBoundary, integrate_boundaries

        mb = strategy.boundary
        if mb is None:
            mb = integrate_boundaries(params, consumption, state.m)
        if not isinstance(mb, MovingBoundary):
            raise InvalidParams("Active strategy needs a MovingBoundary")
        x = _x_grid(strategy.n_table)
        k = derive_constants(params)
        rows = []
        for m in np.linspace(mb.m0, mb.m_star, strategy.n_m):
            b = mb.slice_at(float(m))
            if b.y_m == 0.0:
                w = m * (1.0 - x * x)
                rows.append(params.merton_factor / (k.gamma - 1.0) * np.maximum(b.c_over_r - w, 0.0))
            else:
                rows.append(_row_from_dual(DualFunction(b, k), params, x))
        scale = (strategy.n_m - 1) / (mb.m_star - mb.m0) if mb.m_star > mb.m0 else 0.0
        return _Compiled(K_TABLE, np.zeros(1), np.array(rows), mb.m0, scale)
    raise InvalidParams(f"unknown strategy {strategy!r}")


def _consumption_code(consumption: ConsumptionSpec) -> tuple[int, float, float]:
    if isinstance(consumption, Affine):
        return 0, consumption.slope, consumption.intercept
    if isinstance(consumption, Power):
        return 1, consumption.scale, consumption.exponent
    raise InvalidParams(f"simulation supports Affine and Power consumption, got {consumption!r}")


@numba.njit(nogil=True, cache=True)
def _c_of(code, a, b, m):
    if code == 0:
        return a * m + b
    return a * m**b


@numba.njit(nogil=True, cache=True)
def _interp_row(table, row, x):
    fx = min(x, 1.0) * (table.shape[1] - 1)
    ix = min(int(fx), table.shape[1] - 2)
    ax = fx - ix
    return (1.0 - ax) * table[row, ix] + ax * table[row, ix + 1]


@numba.njit(nogil=True, cache=True)
def _pi_of(kind, args, table, m_lo, m_scale, w, m, inv_m, safe):
    """Risky amount at (w, m); ``inv_m`` = 1/m and ``safe`` = c(m)/r are cached by the caller.

    Table strategies are stored on x = sqrt((m - w)/m) in [0, 1], because the
    optimal strategies vanish like sqrt(m - w) at the maximum.  A one-row table
    belongs to the fixed level ``m_lo`` (with args[0] = 1/m_lo); wealth above
    it holds no risky asset.  A multi-row table is uniform in m on
    [m_lo, m_lo + (rows - 1)/m_scale] and clamped outside.
    """
    if kind == 0:
        gap = safe - w
        return args[0] * gap if gap > 0.0 else 0.0
    if kind == 1:
        return args[0]
    if kind == 2:
        return args[0] * w
    if table.shape[0] == 1:
        if w >= m_lo:
            return 0.0
        return _interp_row(table, 0, math.sqrt((m_lo - w) * args[0]))
    x = math.sqrt((m - w) * inv_m) if w < m else 0.0
    fm = (m - m_lo) * m_scale
    if fm <= 0.0:
        return _interp_row(table, 0, x)
    n_m = table.shape[0]
    if fm >= n_m - 1:
        return _interp_row(table, n_m - 1, x)
    im = int(fm)
    am = fm - im
    return (1.0 - am) * _interp_row(table, im, x) + am * _interp_row(table, im + 1, x)


@numba.njit(nogil=True, cache=True)
def _score_weight(lam, tau, death_clock):
    return 1.0 if death_clock else math.exp(-lam * tau)


@numba.njit(nogil=True, cache=True)
def _lanes_euler(
    gen, w0, m0, horizon, r, mu, sigma, lam, ccode, ca, cb,
    kind, args, table, m_lo, m_scale, dt, death_clock,
    score, status, excursion, w, m, c, safe, inv_m, alive,
):
    """One Brownian path driving an Euler-Maruyama path from every start in ``w0``.

    Each lane's result lands in ``score``, ``status`` and ``excursion`` (its
    largest W - m0); the other arrays are scratch space.  With a single lane
    this is plain path-by-path simulation.
    """
    n_lanes = w0.shape[0]
    c0 = _c_of(ccode, ca, cb, m0)
    for s in range(n_lanes):
        w[s] = w0[s]
        m[s] = m0
        c[s] = c0
        safe[s] = c0 / r
        inv_m[s] = 1.0 / m0
        alive[s] = 1.0
        score[s] = 0.0
        excursion[s] = 0.0
        status[s] = ALIVE
    n_open = n_lanes
    sqdt = math.sqrt(dt)
    vol = sigma * sqdt
    excess = mu - r
    t = 0.0
    while t < horizon and n_open > 0:
        z = gen.standard_normal()
        for s in range(n_lanes):
            if status[s] != ALIVE:
                continue
            ws = w[s]
            pi = _pi_of(kind, args, table, m_lo, m_scale, ws, m[s], inv_m[s], safe[s])
            sd = vol * pi
            w1 = ws + (r * ws + excess * pi - c[s]) * dt + sd * z
            if w1 <= 0.0:
                tau = t + dt * ws / (ws - w1)
                if tau < horizon:
                    score[s] += alive[s] * _score_weight(lam, tau, death_clock)
                    status[s] = RUINED
                else:
                    status[s] = DIED
                n_open -= 1
                continue
            # bridge crossing probability exp(-2 w w1 / sd^2), skipped when negligible
            if 2.0 * ws * w1 < BRIDGE_CUTOFF * sd * sd:
                p = alive[s] * math.exp(-2.0 * ws * w1 / (sd * sd))
                score[s] += p * _score_weight(lam, t + 0.5 * dt, death_clock)
                alive[s] -= p
            w[s] = w1
            if w1 > m[s]:
                excursion[s] = max(excursion[s], w1 - m0)
                m[s] = w1
                inv_m[s] = 1.0 / w1
                c[s] = _c_of(ccode, ca, cb, w1)
                safe[s] = c[s] / r
            if w1 >= safe[s]:
                status[s] = SAFE
                n_open -= 1
        t += dt
    for s in range(n_lanes):
        if status[s] == ALIVE:
            status[s] = DIED


@numba.njit(nogil=True, cache=True)
def _lanes_exact(gen, w0, c, horizon, r, mu, sigma, lam, k, dt, death_clock, score, status, x, alive):
    """One Brownian path driving the shortfall Z = c/r - W under FixedMax from every start.

    log Z is a Brownian motion with drift, so each step is exact in law and
    the bridge correction is the exact crossing probability.  All lanes share
    the increment, so lane s is ruined when the common offset reaches its gap
    ``x[s]`` to the ruin level; with gaps sorted only the nearest open lanes
    need any work.
    """
    n_lanes = w0.shape[0]
    vol = sigma * k
    step_mean = (r - (mu - r) * k - 0.5 * vol * vol) * dt
    step_sd = vol * math.sqrt(dt)
    bridge_scale = 2.0 / (vol * vol * dt)
    top = math.log(c / r)
    for s in range(n_lanes):
        x[s] = top - math.log(c / r - w0[s])
        alive[s] = 1.0
        score[s] = 0.0
        status[s] = ALIVE
    order = np.argsort(x)
    first = 0
    offset = 0.0
    t = 0.0
    while t < horizon and first < n_lanes:
        dx = step_mean + step_sd * gen.standard_normal()
        moved = offset + dx
        while first < n_lanes and moved >= x[order[first]]:
            s = order[first]
            tau = t + dt * (x[s] - offset) / dx
            if tau < horizon:
                score[s] += alive[s] * _score_weight(lam, tau, death_clock)
                status[s] = RUINED
            else:
                status[s] = DIED
            first += 1
        for j in range(first, n_lanes):
            s = order[j]
            zb = bridge_scale * (x[s] - offset) * (x[s] - moved)
            if zb >= BRIDGE_CUTOFF:
                # farther lanes have larger gaps at both ends
                break
            p = alive[s] * math.exp(-zb)
            score[s] += p * _score_weight(lam, t + 0.5 * dt, death_clock)
            alive[s] -= p
        offset = moved
        t += dt
    for s in range(n_lanes):
        if status[s] == ALIVE:
            status[s] = DIED


@numba.njit(nogil=True, cache=True)
def _run_block(
    gen, n, w0, m0, r, mu, sigma, lam, ccode, ca, cb,
    kind, args, table, m_lo, m_scale, dt, t_max, exact, death_clock,
):
    """Simulate ``n`` paths from each start in ``w0``.

    Returns per-start sums, sums of squares, status counts and largest
    excursion.  ``kind`` is made a compile-time constant: with it known the
    strategy lookup folds to straight-line code, several times faster per step.
    """
    numba.literally(kind)
    n_lanes = w0.shape[0]
    s1 = np.zeros(n_lanes)
    s2 = np.zeros(n_lanes)
    counts = np.zeros((n_lanes, 5), dtype=np.int64)
    worst = np.zeros(n_lanes)
    score = np.zeros(n_lanes)
    status = np.zeros(n_lanes, dtype=np.int64)
    excursion = np.zeros(n_lanes)
    w = np.empty(n_lanes)
    m = np.empty(n_lanes)
    c = np.empty(n_lanes)
    safe = np.empty(n_lanes)
    inv_m = np.empty(n_lanes)
    alive = np.empty(n_lanes)
    c0 = _c_of(ccode, ca, cb, m0)
    for _ in range(n):
        horizon = t_max
        if death_clock:
            horizon = min(gen.exponential(1.0 / lam), t_max)
        if exact:
            _lanes_exact(gen, w0, c0, horizon, r, mu, sigma, lam, args[0], dt, death_clock, score, status, w, alive)
        else:
            _lanes_euler(
                gen, w0, m0, horizon, r, mu, sigma, lam, ccode, ca, cb,
                kind, args, table, m_lo, m_scale, dt, death_clock,
                score, status, excursion, w, m, c, safe, inv_m, alive,
            )
        for s in range(n_lanes):
            st = status[s]
            if st == DIED and horizon >= t_max:
                st = TRUNCATED
            counts[s, st] += 1
            s1[s] += score[s]
            s2[s] += score[s] * score[s]
            if not exact:
                worst[s] = max(worst[s], excursion[s])
    return s1, s2, counts, worst


def _check_scheme(config, strategy, params, consumption, state) -> None:
    if config.scheme is not Scheme.EXACT_SHORTFALL_GBM:
        return
    if not isinstance(strategy, FixedMax):
        raise SchemeMismatch("ExactShortfallGBM simulates the FixedMax strategy only")
    if classify_regime(params, consumption, state) is not Regime.FIXED_MAX_BELOW_SAFE:
        raise SchemeMismatch("ExactShortfallGBM is valid only when c(m)/r <= m")


def _simulate(params, consumption, states, strategy, config) -> list[tuple[RuinEstimate, float]]:
    """Estimates and largest excursions for starts sharing one maximum wealth."""
    states = [s if isinstance(s, AgentState) else AgentState(*s) for s in states]
    if not states:
        return []
    m0 = states[0].m
    if any(s.m != m0 for s in states):
        raise InvalidParams("all starting states of one run must share the same maximum wealth")
    t_max = config.resolved_t_max(params)
    n = int(config.n_paths)
    c0 = float(consumption.c(m0))

    out: list = [None] * len(states)
    live = []
    for i, s in enumerate(states):
        if s.w <= 0:
            out[i] = (RuinEstimate(1.0, 0.0, 0.0, n, 0, 0, 0, n), 0.0)
        elif s.w * params.r >= c0:
            out[i] = (RuinEstimate(0.0, 0.0, 0.0, 0, n, 0, 0, n), 0.0)
        else:
            _check_scheme(config, strategy, params, consumption, s)
            live.append(i)
    if not live:
        return out

    comp = _compile(strategy, params, consumption, states[live[0]])
    ccode, ca, cb = _consumption_code(consumption)
    death_clock = config.estimator is Estimator.DEATH_CLOCK
    exact = config.scheme is Scheme.EXACT_SHORTFALL_GBM
    w0 = np.array([states[i].w for i in live])

    sizes = [config.block_size] * (n // config.block_size)
    if n % config.block_size:
        sizes.append(n % config.block_size)

    def block(b: int):
        seq = np.random.SeedSequence(int(config.seed), spawn_key=(b,))
        gen = np.random.Generator(np.random.PCG64(seq))
        return _run_block(
            gen, sizes[b], w0, m0, params.r, params.mu, params.sigma, params.lam,
            ccode, ca, cb, comp.kind, comp.args, comp.table, comp.m_lo, comp.m_scale,
            config.dt, t_max, exact, death_clock,
        )

    if config.workers == 1 or len(sizes) == 1:
        results = [block(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(block, range(len(sizes))))

    s1 = np.zeros(len(live))
    s2 = np.zeros(len(live))
    counts = np.zeros((len(live), 5), dtype=np.int64)
    worst = np.zeros(len(live))
    for r1, r2, cnt, exc in results:
        s1 += r1
        s2 += r2
        counts += cnt
        worst = np.maximum(worst, exc)
    tail = math.exp(-params.lam * t_max)
    for j, i in enumerate(live):
        mean = s1[j] / n
        var = max(s2[j] - n * mean * mean, 0.0) / (n - 1) if n > 1 else 0.0
        # a truncated path could still have been ruined later, but only after t_max
        bias = tail if death_clock else tail * float(counts[j, TRUNCATED]) / n
        est = RuinEstimate(
            point=min(max(float(mean), 0.0), 1.0),
            std_error=math.sqrt(var / n),
            truncation_bias_bound=float(bias),
            n_ruined=int(counts[j, RUINED]),
            n_safe_absorbed=int(counts[j, SAFE]),
            n_truncated=int(counts[j, TRUNCATED]),
            n_died=int(counts[j, DIED]),
            n_paths=n,
        )
        out[i] = (est, float(worst[j]))
    return out


def simulate_ruin(
    params: MarketParams,
    consumption: ConsumptionSpec,
    state: AgentState,
    strategy: Strategy,
    config: SimConfig | None = None,
) -> RuinEstimate:
    """Estimate the probability of ruin before death from ``state`` under ``strategy``."""
    return _simulate(params, consumption, [state], strategy, config or SimConfig())[0][0]


def simulate_ruin_states(
    params: MarketParams,
    consumption: ConsumptionSpec,
    states,
    strategy: Strategy,
    config: SimConfig | None = None,
) -> list[RuinEstimate]:
    """Estimates for several starting states that share one maximum wealth.

    Every start gets ``n_paths`` paths of its own, but path i of each start is
    driven by the same Brownian increments and death time (common random
    numbers).  Each estimate has the same law as a separate
    :func:`simulate_ruin` run; a single run is much cheaper than one per start
    because the random numbers, the dominant cost, are drawn once.  Estimates
    for different starts are positively correlated.
    """
    return [est for est, _ in _simulate(params, consumption, list(states), strategy, config or SimConfig())]


def max_wealth_excursion(
    params: MarketParams,
    consumption: ConsumptionSpec,
    state: AgentState,
    strategy: Strategy,
    config: SimConfig | None = None,
) -> float:
    """Largest (W_t - m)^+ over all paths and steps, for strategies meant to keep W <= m."""
    if not isinstance(strategy, (FixedMax, Blocked, ConstantAmount)):
        raise InvalidParams("excursions are measured for FixedMax, Blocked or zero-risk strategies")
    return _simulate(params, consumption, [state], strategy, config or SimConfig())[0][1]


def simulate_with_excursions(
    params: MarketParams,
    consumption: ConsumptionSpec,
    states,
    strategy: Strategy,
    config: SimConfig | None = None,
) -> list[tuple[RuinEstimate, float]]:
    """Like :func:`simulate_ruin_states` but also returns each start's largest excursion above m."""
    return _simulate(params, consumption, list(states), strategy, config or SimConfig())


def overshoot_bound(
    params: MarketParams,
    consumption: ConsumptionSpec,
    m: float,
    strategy: Strategy,
    dt: float,
    n_sigma: float = 6.0,
    n_grid: int = 4001,
) -> float:
    """Twice the largest one-step rise above ``m`` from any w <= m with a draw of n_sigma.

    For strategies whose volatility vanishes like sqrt(m - w) the worst start
    sits just below m, so the bound is taken over a fine grid of w.
    """
    state = AgentState(m, m)
    comp = _compile(strategy, params, consumption, state)
    c = float(consumption.c(m))
    x = np.linspace(0.0, 1.0, n_grid) ** 2
    worst = 0.0
    for w in m * (1.0 - x):
        pi = _pi_of(comp.kind, comp.args, comp.table, comp.m_lo, comp.m_scale, float(w), m, 1.0 / m, c / params.r)
        drift = (params.r * w + (params.mu - params.r) * pi - c) * dt
        rise = w - m + drift + n_sigma * params.sigma * abs(pi) * math.sqrt(dt)
        worst = max(worst, rise)
    return 2.0 * worst


def strategy_from_dict(data: dict) -> Strategy:
    data = dict(data)
    name = data.pop("name", None)
    if name not in STRATEGIES:
        raise InvalidParams(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}")
    try:
        return STRATEGIES[name](**data)
    except TypeError as exc:
        raise InvalidParams(str(exc)) from None


__all__ = [
    "Active",
    "Blocked",
    "ConstantAmount",
    "ConstantProportion",
    "Estimator",
    "FixedMax",
    "RuinEstimate",
    "Scheme",
    "SimConfig",
    "Strategy",
    "default_t_max",
    "max_wealth_excursion",
    "overshoot_bound",
    "simulate_ruin",
    "simulate_ruin_states",
    "simulate_with_excursions",
    "strategy_from_dict",
]
