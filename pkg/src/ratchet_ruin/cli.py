"""Command line: ``ratchet-ruin <evaluate|curve|mstar|simulate|verify> --scenario FILE``.

Every record echoes the resolved scenario and the package version.  Numbers
are rounded to 12 significant digits.  Exit codes: 0 ok, 1 a verification
check failed, 2 invalid input or wrong regime, 3 a solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .closed_form import fixed_max_solution, pi_fixed_max, psi_fixed_max
from .diagnostics import mc_cross_check, regime_suite
from .errors import ConvergenceError, InvalidParams, OutOfRegime
from .model import AgentState, Regime, classify_regime
from .ratchet_active import MovingBoundary, integrate_boundaries, pi_active, psi_active
from .ratchet_blocked import (
    boundary_residuals,
    dual_function,
    find_m_star,
    invert_dual,
    margin_profile,
    psi_blocked,
    ratchet_condition,
    strategy_from_dual,
)
from .scenario import Scenario, load
from .simulator import Active, Blocked, FixedMax, STRATEGIES, simulate_ruin, strategy_from_dict

SCHEMA_VERSION = 1
SIG_DIGITS = 12
CURVE_COLUMNS = ("w", "m", "regime", "psi", "pi_star", "comparison_phi")


def _round(x):
    """Round floats (recursively) to 12 significant digits; non-finite values become strings."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIG_DIGITS}g}") + 0.0  # + 0.0 drops the sign of -0.0
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v) for v in x]
    return x


def _record(kind: str, scenario: Scenario, body: dict, **echo) -> dict:
    return {
        "schema": f"ratchet_ruin.{kind}",
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": {**scenario.to_dict(), **echo},
        **body,
    }


def _comparison_phi(scenario: Scenario, w: float, m: float) -> float:
    sol = fixed_max_solution(scenario.market, scenario.consumption, m, check_regime=False)
    return psi_fixed_max(sol, w)


class _BoundaryCache:
    """Reuse one moving boundary for every m it covers."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.mb: MovingBoundary | None = None

    def get(self, m: float) -> MovingBoundary:
        if self.mb is None or not (self.mb.m0 <= m <= self.mb.m_star):
            self.mb = integrate_boundaries(self.scenario.market, self.scenario.consumption, m)
        return self.mb


def _evaluate_point(scenario: Scenario, w: float, m: float, cache: _BoundaryCache) -> dict:
    params, cons = scenario.market, scenario.consumption
    state = AgentState(w, m)
    regime = classify_regime(params, cons, state)
    safe = float(cons.c(m)) / params.r
    out = {"regime": str(regime), "w": w, "m": m, "safe_level": safe}
    if regime is Regime.RUINED:
        out.update(psi=1.0, pi_star=None, strategy="ruined")
    elif regime is Regime.SAFE_LEVEL:
        out.update(psi=0.0, pi_star=0.0, strategy="all riskless")
    elif regime is Regime.FIXED_MAX_BELOW_SAFE:
        sol = fixed_max_solution(params, cons, m)
        out.update(psi=psi_fixed_max(sol, w), pi_star=pi_fixed_max(sol, w, params), gamma=sol.gamma)
    elif regime is Regime.RATCHET_BLOCKED:
        f = dual_function(params, cons, m)
        y = invert_dual(f, w)
        b = f.boundary
        cond = ratchet_condition(params, cons, m)
        out.update(
            psi=psi_blocked(f, w),
            pi_star=float(strategy_from_dual(f, y, params)),
            boundary={"y_m": b.y_m, "y_0": b.y_0, "D1": b.D1, "D2": b.D2},
            boundary_residuals=boundary_residuals(f),
            ratchet_condition={"lhs": cond.lhs, "rhs": cond.rhs, "margin": cond.margin},
        )
    else:
        mb = cache.get(m)
        b = mb.slice_at(m)
        out.update(
            psi=psi_active(mb, w, m),
            pi_star=pi_active(mb, w, m),
            m_star=mb.m_star,
            binding=mb.binding,
            boundary={"y_m": b.y_m, "y_0": b.y_0, "D1": b.D1, "D2": b.D2},
            grid={
                "m0": mb.m0,
                "n_nodes": int(mb.m_grid.size),
                "max_constraint_residual": float(mb.residuals.max()),
            },
        )
    return out


def cmd_evaluate(scenario: Scenario) -> dict:
    s = scenario.state
    return _record("evaluate", scenario, _evaluate_point(scenario, s.w, s.m, _BoundaryCache(scenario)))


def parse_sweep(text: str) -> tuple[str, float, float, int]:
    """Parse ``w:lo:hi:n`` or ``m:lo:hi:n``."""
    parts = text.split(":")
    if len(parts) != 4 or parts[0] not in ("w", "m"):
        raise InvalidParams(f"sweep must look like w:<lo>:<hi>:<n> or m:<lo>:<hi>:<n>, got {text!r}")
    try:
        lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise InvalidParams(f"bad numbers in sweep {text!r}") from None
    if n < 1 or not lo <= hi:
        raise InvalidParams(f"sweep needs lo <= hi and at least one point, got {text!r}")
    return parts[0], lo, hi, n


def cmd_curve(scenario: Scenario, variable: str = "w", lo: float | None = None, hi: float | None = None, points: int = 101) -> list[dict]:
    """Rows of (w, m, regime, psi, pi_star, comparison_phi) along a sweep of w or m."""
    s = scenario.state
    if variable == "w":
        lo = 0.0 if lo is None else lo
        hi = s.m if hi is None else hi
        pairs = [(float(w), s.m) for w in np.linspace(lo, hi, points)]
    elif variable == "m":
        lo = s.m if lo is None else lo
        hi = 2 * s.m if hi is None else hi
        pairs = [(s.w, float(m)) for m in np.linspace(lo, hi, points)]
    else:
        raise InvalidParams(f"sweep variable must be w or m, got {variable!r}")
    for w, m in pairs:
        AgentState(w, m)  # validate the whole sweep before solving anything
    cache = _BoundaryCache(scenario)
    active_ms = [m for w, m in pairs if classify_regime(scenario.market, scenario.consumption, AgentState(w, m)) is Regime.RATCHET_ACTIVE]
    if active_ms:
        cache.get(min(active_ms))
    rows = []
    for w, m in pairs:
        point = _evaluate_point(scenario, w, m, cache)
        rows.append({
            "w": w,
            "m": m,
            "regime": point["regime"],
            "psi": point["psi"],
            "pi_star": point["pi_star"],
            "comparison_phi": _comparison_phi(scenario, w, m),
        })
    return rows


def curve_csv(rows: list[dict], scenario: Scenario) -> str:
    buf = io.StringIO()
    buf.write(f"# schema=ratchet_ruin.curve schema_version={SCHEMA_VERSION} version={__version__}\n")
    buf.write(f"# config={json.dumps(_round(scenario.to_dict()), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for row in rows:
        writer.writerow(["" if row[c] is None else (f"{row[c] + 0.0:.{SIG_DIGITS}g}" if isinstance(row[c], float) else row[c]) for c in CURVE_COLUMNS])
    return buf.getvalue()


def cmd_mstar(scenario: Scenario, grid_factor: float = 1.05, profile_points: int = 21) -> dict:
    params, cons, s = scenario.market, scenario.consumption, scenario.state
    # the regime of the maximum alone decides; wealth plays no part in m*
    cons.require_increasing()
    if not (s.m * params.r < float(cons.c(s.m)) and not ratchet_condition(params, cons, s.m).holds):
        raise OutOfRegime(f"m* is defined only where raising the maximum is optimal, which is not the case at m={s.m:g}")
    search = find_m_star(params, cons, s.m, grid_factor=grid_factor)
    refined = find_m_star(params, cons, s.m, grid_factor=math.sqrt(grid_factor))
    body = {
        "m0": s.m,
        "m_star": search.m_star,
        "binding": search.binding,
        "bracket": list(search.bracket),
        "certificate": search.certificate,
        "refinement": {
            "grid_factor": math.sqrt(grid_factor),
            "m_star": refined.m_star,
            "relative_change": abs(refined.m_star - search.m_star) / search.m_star,
        },
        "margin_profile": margin_profile(params, cons, s.m, search.m_star, profile_points),
    }
    crossing = getattr(cons, "safe_crossing", None)
    if crossing is not None and crossing(params.r) is not None:
        body["safe_crossing"] = crossing(params.r)
    return _record("mstar", scenario, body, grid_factor=grid_factor)


def _default_strategy(regime: Regime):
    if regime is Regime.FIXED_MAX_BELOW_SAFE:
        return FixedMax()
    if regime is Regime.RATCHET_BLOCKED:
        return Blocked()
    if regime is Regime.RATCHET_ACTIVE:
        return Active()
    return FixedMax()


def _optimum(scenario: Scenario, regime: Regime) -> float | None:
    s = scenario.state
    if regime is Regime.RUINED:
        return 1.0
    if regime is Regime.SAFE_LEVEL:
        return 0.0
    return _evaluate_point(scenario, s.w, s.m, _BoundaryCache(scenario))["psi"]


def cmd_simulate(scenario: Scenario, strategy=None, *, workers: int | None = None, **sim_overrides) -> dict:
    """Monte Carlo estimate plus, when an analytic value exists, a cross-check against it.

    With the regime's optimal strategy the cross-check is two-sided; with any
    other strategy the estimate is only required not to beat the optimum by
    more than the noise.
    """
    params, cons, s = scenario.market, scenario.consumption, scenario.state
    regime = classify_regime(params, cons, s)
    if strategy is None:
        strategy = _default_strategy(regime)
    elif isinstance(strategy, dict):
        strategy = strategy_from_dict(strategy)
    config = scenario.sim_config(**sim_overrides)
    if workers is not None:
        config = type(config)(**{**config.__dict__, "workers": workers})
    est = simulate_ruin(params, cons, s, strategy, config)
    body = {"regime": str(regime), "strategy": strategy.to_dict(), "estimate": est.to_dict()}

    optimal = type(strategy) is type(_default_strategy(regime)) and not (isinstance(strategy, Blocked) and strategy.m not in (None, s.m))
    analytic = None
    if isinstance(strategy, Blocked) and regime in (Regime.RATCHET_BLOCKED, Regime.RATCHET_ACTIVE):
        # the capped-wealth value is the exact ruin probability of this strategy
        analytic = psi_blocked(dual_function(params, cons, s.m if strategy.m is None else strategy.m), s.w)
        optimal = True
    elif regime not in (Regime.RUINED, Regime.SAFE_LEVEL):
        analytic = _optimum(scenario, regime)
    if analytic is not None:
        check = mc_cross_check(analytic, est)
        if optimal:
            body["cross_check"] = check.to_dict()
        else:
            tol = check.threshold
            body["optimality_check"] = {
                "analytic_optimum": analytic,
                "point": est.point,
                "pass": bool(est.point >= analytic - tol),
                "tolerance": tol,
            }
    return _record("simulate", scenario, body, sim=config.to_dict(params))


def cmd_verify(scenario: Scenario, perturb_d1: float = 1.0) -> tuple[dict, int]:
    reports = regime_suite(scenario.market, scenario.consumption, scenario.state, perturb_d1=perturb_d1)
    ok = all(r.passed for r in reports)
    body = {
        "regime": str(classify_regime(scenario.market, scenario.consumption, scenario.state)),
        "all_pass": ok,
        "reports": [r.to_dict() for r in reports],
    }
    return _record("verify", scenario, body, perturb_d1=perturb_d1), 0 if ok else 1


def _parse_strategy(text: str | None):
    if text is None:
        return None
    name, _, arg = text.partition(":")
    if name not in STRATEGIES:
        raise InvalidParams(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}")
    if name == "ConstantAmount":
        return strategy_from_dict({"name": name, "amount": float(arg)})
    if name == "ConstantProportion":
        return strategy_from_dict({"name": name, "fraction": float(arg)})
    if arg:
        raise InvalidParams(f"strategy {name} takes no argument")
    return strategy_from_dict({"name": name})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ratchet-ruin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario INI file")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        return p

    common(sub.add_parser("evaluate", help="ruin probability and strategy at the scenario state"))
    p = common(sub.add_parser("curve", help="table along a sweep of w or m"))
    p.add_argument("--sweep", default=None, help="w:<lo>:<hi>:<n> or m:<lo>:<hi>:<n> (default w:0:m:101)")
    p = common(sub.add_parser("mstar", help="level where raising the maximum stops"))
    p.add_argument("--grid-factor", type=float, default=1.05)
    p = common(sub.add_parser("simulate", help="Monte Carlo estimate"))
    p.add_argument("--seed", type=int)
    p.add_argument("--paths", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--workers", type=int, default=None, help="threads (does not change the result)")
    p.add_argument("--strategy", help="FixedMax, Blocked, Active, ConstantAmount:<amount> or ConstantProportion:<fraction>")
    p = common(sub.add_parser("verify", help="run the analytic checks for the scenario's regime"))
    p.add_argument("--perturb-d1", type=float, default=1.0, help="scale D1 of the candidate (negative control)")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def dumps(record: dict) -> str:
    return json.dumps(_round(record), indent=2, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    code = 0
    try:
        scenario = load(args.scenario)
        if args.command == "evaluate":
            text = dumps(cmd_evaluate(scenario))
        elif args.command == "curve":
            variable, lo, hi, n = parse_sweep(args.sweep) if args.sweep else ("w", None, None, 101)
            rows = cmd_curve(scenario, variable, lo, hi, n)
            if args.format == "json":
                text = dumps(_record("curve", scenario, {"columns": list(CURVE_COLUMNS), "rows": rows}))
            else:
                text = curve_csv(rows, scenario)
        elif args.command == "mstar":
            text = dumps(cmd_mstar(scenario, args.grid_factor))
        elif args.command == "simulate":
            workers = args.workers if args.workers is not None else 1
            record = cmd_simulate(
                scenario, _parse_strategy(args.strategy), workers=workers,
                seed=args.seed, n_paths=args.paths, dt=args.dt,
            )
            text = dumps(record)
        else:
            record, code = cmd_verify(scenario, args.perturb_d1)
            text = dumps(record)
    except ValueError as exc:
        sys.stdout.write(dumps({"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": 2}}))
        return 2
    except ConvergenceError as exc:
        sys.stdout.write(dumps({"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": 3}}))
        return 3
    _emit(text, args.out)
    return code


def run() -> None:
    sys.exit(main())


__all__ = [
    "cmd_curve",
    "cmd_evaluate",
    "cmd_mstar",
    "cmd_simulate",
    "cmd_verify",
    "curve_csv",
    "main",
    "parse_sweep",
]
