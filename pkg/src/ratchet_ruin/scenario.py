"""Scenario files: INI text with the unit spelled out in every key.

Example::

    [market]
    riskless_rate_per_year = 0.05
    risky_drift_per_year = 0.10
    volatility_per_sqrt_year = 0.20
    hazard_rate_per_year = 0.04

    [consumption]
    family = affine
    slope_per_year = 0.0
    intercept_currency_per_year = 4.0

    [state]
    wealth_currency = 40.0
    max_wealth_currency = 100.0

    [sim]            ; optional, any subset
    time_step_years = 0.001
    paths = 200000
    seed = 7

Floats are written with ``repr`` so a scenario survives a write/read cycle
bit for bit.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InvalidParams
from .model import Affine, AgentState, ConsumptionSpec, MarketParams, Power
from .simulator import SimConfig

MARKET_KEYS = {
    "r": "riskless_rate_per_year",
    "mu": "risky_drift_per_year",
    "sigma": "volatility_per_sqrt_year",
    "lam": "hazard_rate_per_year",
}
CONSUMPTION_KEYS = {
    "affine": {"slope": "slope_per_year", "intercept": "intercept_currency_per_year"},
    "power": {"scale": "scale_per_year", "exponent": "exponent"},
}
STATE_KEYS = {"w": "wealth_currency", "m": "max_wealth_currency"}
SIM_KEYS = {
    "dt": ("time_step_years", float),
    "n_paths": ("paths", int),
    "t_max": ("horizon_years", float),
    "seed": ("seed", int),
    "scheme": ("scheme", str),
    "estimator": ("estimator", str),
    "block_size": ("block_size_paths", int),
}


@dataclass(frozen=True)
class Scenario:
    market: MarketParams
    consumption: ConsumptionSpec
    state: AgentState
    sim: dict = field(default_factory=dict)

    def sim_config(self, **overrides) -> SimConfig:
        """SimConfig from the scenario's overrides, then ``overrides`` (None values ignored)."""
        merged = {**self.sim, **{k: v for k, v in overrides.items() if v is not None}}
        return SimConfig(**merged)

    def with_state(self, w: float, m: float) -> "Scenario":
        return replace(self, state=AgentState(w, m))

    def to_dict(self) -> dict:
        return {
            "market": self.market.to_dict(),
            "consumption": self.consumption.to_dict(),
            "state": {"w": self.state.w, "m": self.state.m},
            "sim": dict(self.sim),
        }

    def dumps(self) -> str:
        cp = configparser.ConfigParser()
        cp["market"] = {key: repr(getattr(self.market, attr)) for attr, key in MARKET_KEYS.items()}
        spec = self.consumption.to_dict()
        family = spec["family"]
        cp["consumption"] = {"family": family}
        for attr, key in CONSUMPTION_KEYS[family].items():
            cp["consumption"][key] = repr(float(spec[attr]))
        cp["state"] = {key: repr(float(getattr(self.state, attr))) for attr, key in STATE_KEYS.items()}
        if self.sim:
            cp["sim"] = {SIM_KEYS[k][0]: (repr(v) if isinstance(v, float) else str(v)) for k, v in self.sim.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())


def _float(section: configparser.SectionProxy, key: str) -> float:
    if key not in section:
        raise InvalidParams(f"missing key {key!r} in section [{section.name}]")
    try:
        return float(section[key])
    except ValueError:
        raise InvalidParams(f"[{section.name}] {key} = {section[key]!r} is not a number") from None


def loads(text: str) -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidParams(f"cannot parse scenario: {exc}") from None
    for name in ("market", "consumption", "state"):
        if name not in cp:
            raise InvalidParams(f"scenario needs a [{name}] section")
    unknown = set(cp.sections()) - {"market", "consumption", "state", "sim"}
    if unknown:
        raise InvalidParams(f"unknown scenario sections: {sorted(unknown)}")

    market = MarketParams(**{attr: _float(cp["market"], key) for attr, key in MARKET_KEYS.items()})
    family = cp["consumption"].get("family", "").strip().lower()
    if family not in CONSUMPTION_KEYS:
        raise InvalidParams(f"consumption family must be one of {sorted(CONSUMPTION_KEYS)}, got {family!r}")
    kwargs = {attr: _float(cp["consumption"], key) for attr, key in CONSUMPTION_KEYS[family].items()}
    consumption: ConsumptionSpec = Affine(**kwargs) if family == "affine" else Power(**kwargs)
    state = AgentState(*(_float(cp["state"], key) for key in STATE_KEYS.values()))

    sim: dict = {}
    if "sim" in cp:
        by_key = {key: (attr, conv) for attr, (key, conv) in SIM_KEYS.items()}
        for key, raw in cp["sim"].items():
            if key not in by_key:
                raise InvalidParams(f"unknown [sim] key {key!r}")
            attr, conv = by_key[key]
            try:
                sim[attr] = conv(raw.strip())
            except ValueError:
                raise InvalidParams(f"[sim] {key} = {raw!r} is not a valid {conv.__name__}") from None
        SimConfig(**sim)  # validate early
    return Scenario(market, consumption, state, sim)


def load(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidParams(f"cannot read scenario {path}: {exc}") from None
    return loads(text)
