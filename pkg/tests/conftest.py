import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tkmerge import checks

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(autouse=True)
def strict_invariants():
    """Every fit in the suite checks monotonicity and the eigenvalue bound at each iteration."""
    with checks.strict(True):
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def blobs3():
    """Three well separated round blobs, 100 points each."""
    g = np.random.default_rng(7)
    centers = np.array([[0.0, 0.0], [12.0, 0.0], [0.0, 12.0]])
    x = np.vstack([c + g.standard_normal((100, 2)) for c in centers])
    truth = np.repeat([1, 2, 3], 100)
    return x, truth


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
