import numpy as np
import pytest

from noisymem.generator import GeneratorSpec, construct_subspace_model
from noisymem.model import Thresholds

PSI, PHI = 0.3, 0.99

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_net():
    return construct_subspace_model(GeneratorSpec())


@pytest.fixture(scope="session")
def small_net():
    return construct_subspace_model(GeneratorSpec(n=60, L=6, mean_cluster_size=20, mean_constraints=8))


@pytest.fixture
def thresholds():
    return Thresholds(PSI, PHI)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
