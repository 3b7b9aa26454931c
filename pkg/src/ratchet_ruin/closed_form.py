"""Closed-form solution when 0 < w < c(m)/r <= m.

Here the safe level sits below the current maximum, so maximum wealth never
moves and consumption is the constant c(m).  The minimum ruin probability is
``(1 - r w / c(m))**gamma`` and the optimal strategy invests a fixed multiple
of the shortfall ``c(m)/r - w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRegime
from .model import ConsumptionSpec, MarketParams, derive_constants


@dataclass(frozen=True)
class FixedMaxSolution:
    m: float
    c_of_m: float
    gamma: float
    r: float

    def __post_init__(self) -> None:
        if not self.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")

    @property
    def safe_level(self) -> float:
        return self.c_of_m / self.r


def fixed_max_solution(
    params: MarketParams, consumption: ConsumptionSpec, m: float, *, check_regime: bool = True
) -> FixedMaxSolution:
    """Build the solution at maximum wealth ``m``.

    With ``check_regime=False`` the same formula is returned for m < c(m)/r,
    where it is the constant-consumption benchmark rather than the optimum.
    """
    c = float(consumption.c(m))
    if check_regime and c / params.r > m:
        raise OutOfRegime(f"closed form needs c(m)/r <= m; got c(m)/r={c / params.r:g} > m={m:g}")
    return FixedMaxSolution(m=float(m), c_of_m=c, gamma=derive_constants(params).gamma, r=params.r)


def psi_fixed_max(sol: FixedMaxSolution, w):
    """Ruin probability, extended to 1 for w <= 0 and 0 at or above c(m)/r."""
    w_arr = np.asarray(w, dtype=float)
    x = sol.r * w_arr / sol.c_of_m
    inside = (w_arr > 0) & (x < 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        core = np.exp(sol.gamma * np.log1p(-np.where(inside, x, 0.0)))
    out = np.where(w_arr <= 0, 1.0, np.where(inside, core, 0.0))
    return out if np.ndim(w) else float(out)


def dpsi_fixed_max(sol: FixedMaxSolution, w):
    """First and second wealth derivatives on 0 < w < c(m)/r."""
    w_arr = np.asarray(w, dtype=float)
    k = sol.r / sol.c_of_m
    base = np.log1p(-k * w_arr)
    g = sol.gamma
    d1 = -g * k * np.exp((g - 1.0) * base)
    d2 = g * (g - 1.0) * k * k * np.exp((g - 2.0) * base)
    return d1, d2


def pi_fixed_max(sol: FixedMaxSolution, w, params: MarketParams):
    """((mu - r)/sigma^2) / (gamma - 1) * (c(m)/r - w) for 0 < w < c(m)/r."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr <= 0) or np.any(w_arr >= sol.safe_level):
        raise OutOfRegime(f"pi_fixed_max is defined on (0, {sol.safe_level:g})")
    out = params.merton_factor / (sol.gamma - 1.0) * (sol.safe_level - w_arr)
    return out if np.ndim(w) else float(out)


def shortfall_sde_coefficients(sol: FixedMaxSolution, params: MarketParams) -> tuple[float, float]:
    """Geometric drift and volatility of Z = c(m)/r - W under the optimal strategy.

    dZ = Z (drift dt - vol dB); the noise sign is irrelevant in law.
    """
    delta = 0.5 * params.sharpe**2
    drift = params.r - 2.0 * delta / (sol.gamma - 1.0)
    vol = params.sharpe / (sol.gamma - 1.0)
    return drift, vol


def phi_m_at_max(sol: FixedMaxSolution, consumption: ConsumptionSpec, w: float) -> float:
    """d phi / d m at (w, m), holding w fixed; positive whenever c' > 0."""
    c = sol.c_of_m
    x = sol.r * w / c
    return sol.gamma * math.exp((sol.gamma - 1.0) * math.log1p(-x)) * sol.r * w * float(consumption.dc(sol.m)) / c**2
