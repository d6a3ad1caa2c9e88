import numpy as np
import pytest

from harmonic_atom import OscillatorParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def weak():
    return OscillatorParams(m=1.0, omega=1.0, gamma=0.01, cutoff=100.0)


@pytest.fixture
def medium():
    return OscillatorParams(m=1.0, omega=1.0, gamma=0.1, cutoff=100.0)


@pytest.fixture
def strong():
    return OscillatorParams(m=1.0, omega=1.0, gamma=0.4, cutoff=100.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
