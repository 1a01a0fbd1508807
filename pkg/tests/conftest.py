import numpy as np
import pytest

from areametric.sphere import build_grid

CRITERIA = {}


def record(number, name, ok, detail=""):
    """Store a pass/fail line for one acceptance criterion."""
    CRITERIA[number] = (name, bool(ok), detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        name, ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def grid2():
    return build_grid(2)


@pytest.fixture(scope="session")
def grid2_small():
    return build_grid(2, 1024)


@pytest.fixture(scope="session")
def grid3():
    return build_grid(3)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))
