from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from ratchet_ruin import __version__
from ratchet_ruin.cli import main

MARKET = """
[market]
riskless_rate_per_year = 0.05
risky_drift_per_year = 0.10
volatility_per_sqrt_year = 0.20
hazard_rate_per_year = 0.04
"""

SCENARIOS = {
    "fixed": MARKET + """
[consumption]
family = affine
slope_per_year = 0.0
intercept_currency_per_year = 4.0
[state]
wealth_currency = 40.0
max_wealth_currency = 100.0
""",
    "capped": MARKET + """
[consumption]
family = affine
slope_per_year = 0.06
intercept_currency_per_year = 0.0
[state]
wealth_currency = 50.0
max_wealth_currency = 100.0
""",
    "sqrt": MARKET + """
[consumption]
family = power
scale_per_year = 0.5
exponent = 0.5
[state]
wealth_currency = 15.0
max_wealth_currency = 30.0
""",
}


@pytest.fixture
def scenario(tmp_path):
    def write(name: str, extra: str = "") -> str:
        path = tmp_path / f"{name}.ini"
        path.write_text(SCENARIOS[name] + extra)
        return str(path)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_evaluate_fixed(scenario, capsys):
    code, out = run(capsys, "evaluate", "--scenario", scenario("fixed"))
    rec = json.loads(out)
    assert code == 0
    assert rec["regime"] == "FixedMaxBelowSafe"
    assert rec["psi"] == pytest.approx(0.2447, abs=1e-3)
    assert rec["version"] == __version__ and rec["schema_version"] == 1
    assert rec["config"]["market"]["r"] == 0.05


def test_evaluate_edges(tmp_path, capsys):
    safe = tmp_path / "safe.ini"
    safe.write_text(SCENARIOS["fixed"].replace("wealth_currency = 40.0", "wealth_currency = 90.0"))
    rec = json.loads(run(capsys, "evaluate", "--scenario", str(safe))[1])
    assert rec["regime"] == "SafeLevel" and rec["psi"] == 0
    ruined = tmp_path / "ruined.ini"
    ruined.write_text(SCENARIOS["fixed"].replace("wealth_currency = 40.0", "wealth_currency = 0.0"))
    rec = json.loads(run(capsys, "evaluate", "--scenario", str(ruined))[1])
    assert rec["regime"] == "Ruined" and rec["psi"] == 1


def test_evaluate_ratcheting(scenario, capsys):
    rec = json.loads(run(capsys, "evaluate", "--scenario", scenario("sqrt"))[1])
    assert rec["regime"] == "RatchetActive"
    assert 0 < rec["psi"] < 1


def test_curve_csv(scenario, tmp_path, capsys):
    out = tmp_path / "curve.csv"
    code, _ = run(capsys, "curve", "--scenario", scenario("capped"), "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# schema=ratchet_ruin.curve schema_version=1")
    rows = list(csv.DictReader(io.StringIO("\n".join(l for l in lines if not l.startswith("#")))))
    assert len(rows) == 101
    psi = [float(r["psi"]) for r in rows]
    assert all(a >= b for a, b in zip(psi, psi[1:]))
    assert all(float(r["psi"]) >= float(r["comparison_phi"]) for r in rows if r["regime"] == "RatchetBlocked")


def test_curve_json_m_sweep(scenario, capsys):
    code, out = run(capsys, "curve", "--scenario", scenario("sqrt"), "--format", "json", "--sweep", "m:30:110:5")
    rec = json.loads(out)
    assert code == 0 and len(rec["rows"]) == 5
    assert rec["rows"][-1]["regime"] == "FixedMaxBelowSafe"


def test_bad_sweep(scenario, capsys):
    code, out = run(capsys, "curve", "--scenario", scenario("capped"), "--sweep", "q:1:2:3")
    assert code == 2 and json.loads(out)["error"]["type"] == "InvalidParams"


def test_mstar(scenario, capsys):
    code, out = run(capsys, "mstar", "--scenario", scenario("sqrt"))
    rec = json.loads(out)
    assert code == 0
    assert rec["m_star"] <= rec["safe_crossing"] * (1 + 1e-12)
    assert rec["refinement"]["relative_change"] <= 1e-6


def test_mstar_wrong_regime(scenario, capsys):
    code, out = run(capsys, "mstar", "--scenario", scenario("capped"))
    assert code == 2 and json.loads(out)["error"]["type"] == "OutOfRegime"


def test_simulate_is_reproducible(scenario, capsys):
    args = ("simulate", "--scenario", scenario("fixed"), "--paths", "3000", "--dt", "0.01", "--seed", "5")
    outs = [run(capsys, *args, "--workers", k)[1] for k in ("1", "2", "8")]
    assert outs[0] == outs[1] == outs[2]
    rec = json.loads(outs[0])
    assert rec["cross_check"]["pass"]
    assert rec["config"]["sim"]["n_paths"] == 3000 and "workers" not in rec["config"]["sim"]


def test_simulate_other_strategy(scenario, capsys):
    code, out = run(capsys, "simulate", "--scenario", scenario("capped"), "--paths", "3000", "--dt", "0.01",
                    "--strategy", "ConstantProportion:1.5")
    rec = json.loads(out)
    assert code == 0 and rec["optimality_check"]["pass"]


def test_verify(scenario, capsys):
    assert run(capsys, "verify", "--scenario", scenario("fixed"))[0] == 0
    assert run(capsys, "verify", "--scenario", scenario("capped"))[0] == 0
    code, out = run(capsys, "verify", "--scenario", scenario("capped"), "--perturb-d1", "1.01")
    assert code == 1 and json.loads(out)["all_pass"] is False


def test_missing_scenario(tmp_path, capsys):
    code, out = run(capsys, "evaluate", "--scenario", str(tmp_path / "nope.ini"))
    assert code == 2


def test_module_entry_point(scenario):
    proc = subprocess.run(
        [sys.executable, "-m", "ratchet_ruin", "evaluate", "--scenario", scenario("fixed")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["schema"] == "ratchet_ruin.evaluate"
