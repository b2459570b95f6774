import numpy as np
import pytest

from latentode.dynamics import integrate, make_system, sample_initial_conditions

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def oscillator_series():
    """Reference oscillator (a=0.1, b=-1, c=1, d=0), 5000 samples at dt=0.01."""
    spec = make_system("oscillator")
    x0 = sample_initial_conditions(2, 1, 0)[0]
    return integrate(spec, x0, 0.01, 4999)


@pytest.fixture(scope="session")
def lorenz_series():
    spec = make_system("lorenz")
    x0 = sample_initial_conditions(3, 1, 0)[0]
    return integrate(spec, x0, 0.01, 4999)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
