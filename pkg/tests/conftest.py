import numpy as np
import pytest

from memfir import fixtures
from memfir.device import build_grid


@pytest.fixture(scope="session")
def lowpass():
    return fixtures.lowpass_targets()


@pytest.fixture(scope="session")
def highpass():
    return fixtures.highpass_targets()


@pytest.fixture(scope="session")
def grid7():
    return build_grid(1e3, 1e6, 7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance check, then assert it."""

    def record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
