from __future__ import annotations

import pytest

from ratchet_ruin import Affine, MarketParams, Power
from ratchet_ruin.ratchet_active import integrate_boundaries


@pytest.fixture(scope="session")
def baseline() -> MarketParams:
    return MarketParams(r=0.05, mu=0.10, sigma=0.20, lam=0.04)


@pytest.fixture(scope="session")
def linear_six() -> Affine:
    """c(m) = 0.06 m: above r, so the maximum is a ceiling."""
    return Affine(slope=0.06)


@pytest.fixture(scope="session")
def fold_boundary(baseline):
    """Moving boundary for c(m) = 0.06 m + 1 from m0 = 2; stops where the test holds again."""
    return integrate_boundaries(baseline, Affine(0.06, 1.0), 2.0)


@pytest.fixture(scope="session")
def sqrt_boundary(baseline):
    """Moving boundary for c(m) = 0.5 sqrt(m) from m0 = 30; stops at the safe level m = 100."""
    return integrate_boundaries(baseline, Power(0.5, 0.5), 30.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
