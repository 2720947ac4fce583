from fractions import Fraction

import pytest

from claimtrade.net_model import Bank, Claim, EdgeRanking, Proportional, build_network

# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE = {}


def make_ex1(kind="edge-ranking", w_external=2):
    """Four banks u, v, w, y; every claim has liability 2; v is the only bank with two claims."""
    pv = EdgeRanking(("vw", "vy")) if kind == "edge-ranking" else Proportional()
    banks = [
        Bank("u", Fraction(1)),
        Bank("v", Fraction(0), pv),
        Bank("w", Fraction(w_external)),
        Bank("y", Fraction(0)),
    ]
    claims = [
        Claim("uv", "u", "v", Fraction(2)),
        Claim("vw", "v", "w", Fraction(2)),
        Claim("vy", "v", "y", Fraction(2)),
        Claim("yv", "y", "v", Fraction(2)),
    ]
    return build_network(banks, claims)


@pytest.fixture
def ex1():
    return make_ex1()


@pytest.fixture
def ex1_prop():
    return make_ex1("proportional")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
