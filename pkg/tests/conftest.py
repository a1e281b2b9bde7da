from fractions import Fraction

import mpmath
import pytest

from delsarte.gegenbauer import basis_context
from delsarte.pipeline import solve


@pytest.fixture(scope="session")
def ctx43():
    return basis_context(43)


@pytest.fixture(scope="session")
def sol43():
    return solve(43, Fraction(1, 2), precision=256)


@pytest.fixture
def prec256():
    with mpmath.workprec(256):
        yield


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
