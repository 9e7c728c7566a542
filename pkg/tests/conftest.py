import numpy as np
import pytest

from sumoss.gp import KernelModel
from sumoss.planners import CandidateSet
from sumoss.simulator import AreaSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def kernel():
    return KernelModel(phi=1.5)


@pytest.fixture
def grid25():
    return AreaSpec().candidates()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def grid(rows, cols, spacing=1.0):
    return CandidateSet(np.array([(c * spacing, r * spacing) for r in range(rows) for c in range(cols)], float))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
