import numpy as np
import pytest

from lhzanneal.hamiltonian import PhysicalProblem, build_bundle
from lhzanneal.lattice import build_layout

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ferro5():
    layout = build_layout(5)
    return build_bundle(PhysicalProblem(layout, np.full(layout.K, 0.5)))


@pytest.fixture
def rng():
    return np.random.default_rng(20201015)


def random_bundle(N, seed):
    layout = build_layout(N)
    J = np.random.default_rng(seed).uniform(-0.5, 0.5, layout.K)
    return build_bundle(PhysicalProblem(layout, J))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
