import numpy as np
import pytest

from artifact.quantum_delta import DeltaCoupling
from artifact.states import CoherentParams


@pytest.fixture
def desk():
    """hbar = 0.1, m = sigma0 = 1, (q, p) = (-2, 1)."""
    return CoherentParams.standard(0.1, 1.0, -2.0, 1.0)


@pytest.fixture
def coupling(desk):
    return DeltaCoupling.for_params(1.0, desk)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
