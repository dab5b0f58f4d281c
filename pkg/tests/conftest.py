import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

from exactcuts.problem import Problem, Row, Variable, parse_problem

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")

DATA = Path(__file__).resolve().parent.parent / "data"

TRIANGLE_PROBLEM = """\
VAR 2
x1 -inf +inf int
x2 -inf +inf int
OBJ min

CON 3
C1 >= 1 x1 2 x2 3
C2 <= 2 x1 3 x2 -4
C3 <= 3 x1 -1 x2 6
"""


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def triangle_problem() -> Problem:
    return parse_problem(TRIANGLE_PROBLEM, name="triangle")


@pytest.fixture
def triangle_boxed() -> Problem:
    """Triangle rows with 0..10 boxes so the enumeration oracle applies."""
    return parse_problem(TRIANGLE_PROBLEM.replace("-inf +inf", "0 10"), name="trianglebox")


@pytest.fixture
def triangle_vipr() -> str:
    return (DATA / "triangle.vipr").read_text()


@pytest.fixture
def knapsack() -> Problem:
    """min -x - y s.t. 2x + 3y <= 7, x, y integer in [0, 7]."""
    return Problem(
        [Variable("x", Fraction(0), Fraction(7), True), Variable("y", Fraction(0), Fraction(7), True)],
        [Row({0: Fraction(2), 1: Fraction(3)}, "<=", Fraction(7), "cap")],
        {0: Fraction(-1), 1: Fraction(-1)},
        "knap2",
    )


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
