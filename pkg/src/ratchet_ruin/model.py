"""Market and consumption primitives, derived constants and regime routing."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParams


@dataclass(frozen=True)
class MarketParams:
    """Riskless rate ``r``, risky drift ``mu``, volatility ``sigma`` and hazard rate ``lam``.

    All rates are per year; ``sigma`` is per square-root year.
    """

    r: float
    mu: float
    sigma: float
    lam: float

    def __post_init__(self) -> None:
        for name in ("r", "mu", "sigma", "lam"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParams(f"{name} must be finite, got {value!r}")
        if self.r <= 0:
            raise InvalidParams(f"riskless rate must be positive, got r={self.r}")
        if self.sigma <= 0:
            raise InvalidParams(f"volatility must be positive, got sigma={self.sigma}")
        if self.lam <= 0:
            raise InvalidParams(f"hazard rate must be positive, got lam={self.lam}")
        if self.mu <= self.r:
            raise InvalidParams(f"need mu > r, got mu={self.mu}, r={self.r}")

    @property
    def sharpe(self) -> float:
        return (self.mu - self.r) / self.sigma

    @property
    def merton_factor(self) -> float:
        """(mu - r) / sigma**2, the multiplier shared by every feedback strategy."""
        return (self.mu - self.r) / self.sigma**2

    def to_dict(self) -> dict:
        return {"r": self.r, "mu": self.mu, "sigma": self.sigma, "lam": self.lam}


class ConsumptionSpec:
    """A consumption rate c(m) that depends on maximum wealth only.

    Subclasses provide :meth:`c` and :meth:`dc` (both accept scalars or
    arrays) and report whether c' is strictly positive.
    """

    family: str = ""

    def c(self, m):
        raise NotImplementedError

    def dc(self, m):
        raise NotImplementedError

    @property
    def strictly_increasing(self) -> bool:
        raise NotImplementedError

    def require_increasing(self) -> None:
        """Reject specs with c' = 0; the ratchet solvers assume c' > 0."""
        if not self.strictly_increasing:
            raise InvalidParams(
                f"{self!r} has zero slope; ratchet-regime computations need c'(m) > 0"
            )

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(data: dict) -> "ConsumptionSpec":
        family = str(data.get("family", "")).lower()
        if family == "affine":
            return Affine(slope=float(data["slope"]), intercept=float(data.get("intercept", 0.0)))
        if family == "power":
            return Power(scale=float(data["scale"]), exponent=float(data["exponent"]))
        raise InvalidParams(f"unknown consumption family {data.get('family')!r}")


@dataclass(frozen=True)
class Affine(ConsumptionSpec):
    """c(m) = slope * m + intercept."""

    slope: float
    intercept: float = 0.0
    family = "affine"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept)):
            raise InvalidParams("affine consumption coefficients must be finite")
        if self.slope < 0 or self.intercept < 0:
            raise InvalidParams(
                f"affine consumption needs slope >= 0 and intercept >= 0, got {self}"
            )
        if self.slope == 0 and self.intercept == 0:
            raise InvalidParams("consumption must be positive")

    def c(self, m):
        return self.slope * m + self.intercept

    def dc(self, m):
        if np.ndim(m) == 0:
            return self.slope
        return np.full(np.shape(m), self.slope)

    @property
    def strictly_increasing(self) -> bool:
        return self.slope > 0

    def to_dict(self) -> dict:
        return {"family": "affine", "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class Power(ConsumptionSpec):
    """c(m) = scale * m**exponent; concave for exponent < 1, convex for exponent > 1."""

    scale: float
    exponent: float
    family = "power"

    def __post_init__(self) -> None:
        if not (self.scale > 0 and self.exponent > 0):
            raise InvalidParams(f"power consumption needs scale > 0 and exponent > 0, got {self}")
        if not (math.isfinite(self.scale) and math.isfinite(self.exponent)):
            raise InvalidParams("power consumption coefficients must be finite")

    def c(self, m):
        return self.scale * np.power(m, self.exponent)

    def dc(self, m):
        return self.scale * self.exponent * np.power(m, self.exponent - 1.0)

    @property
    def strictly_increasing(self) -> bool:
        return True

    def safe_crossing(self, r: float) -> float | None:
        """The level m_hat > 0 with c(m_hat) = r * m_hat, when it exists."""
        if self.exponent == 1.0:
            return None
        return (self.scale / r) ** (1.0 / (1.0 - self.exponent))

    def to_dict(self) -> dict:
        return {"family": "power", "scale": self.scale, "exponent": self.exponent}


@dataclass(frozen=True)
class DerivedConstants:
    delta: float
    gamma: float
    B1: float
    B2: float


def derive_constants(params: MarketParams) -> DerivedConstants:
    """Compute delta, gamma, B1 and B2 from the market parameters.

    ``gamma`` is the root > 1 of r*g**2 - (r + lam + delta)*g + lam = 0 and
    ``B1 > 1 > 0 > B2`` are the roots of delta*B**2 - (r - lam + delta)*B - lam = 0.
    Each large root is computed directly and the small root from the product of
    roots, which avoids cancellation in the subtraction.
    """
    if not isinstance(params, MarketParams):
        raise InvalidParams(f"expected MarketParams, got {type(params).__name__}")
    r, lam = params.r, params.lam
    delta = 0.5 * params.sharpe**2

    s = r + lam + delta
    gamma = (s + math.sqrt(s * s - 4.0 * r * lam)) / (2.0 * r)

    q = r - lam + delta
    disc = math.sqrt(q * q + 4.0 * lam * delta)
    if q >= 0:
        B1 = (q + disc) / (2.0 * delta)
        B2 = -lam / (delta * B1)
    else:
        B2 = (q - disc) / (2.0 * delta)
        B1 = -lam / (delta * B2)
    return DerivedConstants(delta=delta, gamma=gamma, B1=B1, B2=B2)


@dataclass(frozen=True)
class AgentState:
    """Current wealth ``w`` and maximum wealth ``m`` (w <= m, m > 0)."""

    w: float
    m: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.w) and math.isfinite(self.m)):
            raise DomainError("state must be finite")
        if self.m <= 0:
            raise DomainError(f"maximum wealth must be positive, got m={self.m}")
        if self.w > self.m:
            raise DomainError(f"wealth cannot exceed maximum wealth (w={self.w} > m={self.m})")


class Regime(str, enum.Enum):
    RUINED = "Ruined"
    SAFE_LEVEL = "SafeLevel"
    FIXED_MAX_BELOW_SAFE = "FixedMaxBelowSafe"
    RATCHET_BLOCKED = "RatchetBlocked"
    RATCHET_ACTIVE = "RatchetActive"

    def __str__(self) -> str:
        return self.value


def safe_level(consumption: ConsumptionSpec, m: float, r: float) -> float:
    """Wealth c(m)/r at and above which ruin is impossible."""
    return float(consumption.c(m)) / r


def classify_regime(params: MarketParams, consumption: ConsumptionSpec, state: AgentState) -> Regime:
    """Route a state to the solver that owns it.

    The knife edge w == c(m)/r is classified as :attr:`Regime.SAFE_LEVEL`.
    Distinguishing the two ratchet regimes needs a boundary solve at ``m``.
    """
    w, m = state.w, state.m
    if w <= 0:
        return Regime.RUINED
    level = safe_level(consumption, m, params.r)
    if w >= level:
        return Regime.SAFE_LEVEL
    if level <= m:
        return Regime.FIXED_MAX_BELOW_SAFE

    from .ratchet_blocked import ratchet_condition

    if ratchet_condition(params, consumption, m).holds:
        return Regime.RATCHET_BLOCKED
    return Regime.RATCHET_ACTIVE
