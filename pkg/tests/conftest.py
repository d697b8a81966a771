import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quasicop import eval2d, qt_matrix  # noqa: E402


@pytest.fixture(scope="session")
def t0():
    return qt_matrix.t0_matrix()


@pytest.fixture(scope="session")
def tr_half():
    return qt_matrix.tr_matrix(Fraction(1, 2))


@pytest.fixture(scope="session")
def uniform2():
    return qt_matrix.from_rows([["1/4", "1/4"], ["1/4", "1/4"]])


@pytest.fixture(scope="session")
def q_t0(t0):
    return eval2d.FixedPointEvaluator(t0)


@pytest.fixture(scope="session")
def q_tr(tr_half):
    return eval2d.FixedPointEvaluator(tr_half)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    lines = mod.summary_lines()
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
