"""Minimum probability of lifetime ruin with consumption ratcheted to maximum wealth."""

from .errors import (
    ConvergenceError,
    DomainError,
    InvalidParams,
    NoBracket,
    NoRoot,
    OutOfRegime,
    RuinError,
    SchemeMismatch,
    SingularDerivative,
    Unbounded,
)
from .model import (
    Affine,
    AgentState,
    ConsumptionSpec,
    DerivedConstants,
    MarketParams,
    Power,
    Regime,
    classify_regime,
    derive_constants,
    safe_level,
)

__version__ = "0.1.0"
