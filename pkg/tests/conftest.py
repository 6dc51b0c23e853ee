import numpy as np
import pytest

from voidplace import Grid1D, MaternParams, SensorParams


@pytest.fixture
def grid10():
    return Grid1D(0.0, 50.0, 10)


@pytest.fixture
def matern():
    return MaternParams(sigma2=0.25, zeta=1.5, beta=150.0)


@pytest.fixture
def wide_sensor():
    # footprint standard deviation of one 50 m cell
    return SensorParams(rho=0.95, sigma_l=5000.0)


def random_instance(rng, n_max=64):
    n = int(rng.integers(2, n_max + 1))
    grid = Grid1D(0.0, 50.0, n)
    lam = rng.gamma(0.5, 1.0, n) * rng.uniform(0.001, 0.05)
    sensor = SensorParams(rho=rng.uniform(0.1, 1.0), sigma_l=rng.uniform(0.5, 4.0) * 2500.0)
    return grid, lam, sensor


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
