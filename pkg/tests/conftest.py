import numpy as np
import pytest

from hdl.linalg_core import random_unitary

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def seeded_unitary(seed, n):
    return random_unitary(n, np.random.default_rng(seed))


# 16 points on the circle of radius 0.7 plus the origin
Z_SAMPLES = [0.0] + [0.7 * np.exp(2j * np.pi * j / 16) for j in range(16)]
