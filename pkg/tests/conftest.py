import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mabprune import FactoredBelief, InstanceSampler, MarkovChainParams
from mabprune.model import MonitoringModel, uniform_model

# JIT compilation makes the first example slow; deadlines would be noise.
settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def case1():
    return InstanceSampler(seed=20240611)


@pytest.fixture(scope="session")
def grid6():
    return uniform_model(6, 6)


@pytest.fixture
def slow_chain():
    return MarkovChainParams(0.1, 0.9)


def small_case1_model(width, height, seed=0):
    """Case-1 style model on an arbitrary grid (sensed chains drawn per cell)."""
    return InstanceSampler(seed, width=width, height=height).sample(0)[0]


def half_belief(model: MonitoringModel, loc=0, p=0.5):
    return FactoredBelief(loc, (p,) * model.num_cells)


def rand_belief(model, rng: np.random.Generator):
    return FactoredBelief(int(rng.integers(model.num_cells)),
                          tuple(rng.uniform(0, 1, model.num_cells)))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
