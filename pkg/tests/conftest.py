import numpy as np
import pytest
from hypothesis import settings

from tempvar.grid import TemperedParams

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# the nine (alpha, sigma) pairs used by the operator-level checks
PARAM_PAIRS = [(a, s) for a in (0.6, 0.75, 0.9) for s in (0.5, 1.0, 2.0)]


@pytest.fixture
def params():
    return TemperedParams(0.75, 1.0, 0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
