import time

import pytest

from resdecay.decay import build_model
from resdecay.oracle import GridConfig, evolve

ACCEPTANCE_LINES = []
TIMINGS = {}


@pytest.fixture(scope="session")
def model():
    """Barrier shell (30, 1, 0.3) with the quantum-box state, 200 poles."""
    start = time.perf_counter()
    m = build_model()
    TIMINGS["model"] = time.perf_counter() - start
    return m


@pytest.fixture(scope="session")
def spec(model):
    return model.spec


@pytest.fixture(scope="session")
def states(model):
    return model.states


@pytest.fixture(scope="session")
def coeffs(model):
    return model.coeffs


@pytest.fixture(scope="session")
def model_oracle(model):
    """Grid evolution of the default model over ten lifetimes."""
    cfg = GridConfig(total_time=10 * model.tau, record_every=5,
                     reference_energy=model.poles[0].resonance_energy)
    start = time.perf_counter()
    res = evolve(model.spec, model.initial, cfg, probe_radii=(0.5,))
    TIMINGS["model_oracle"] = time.perf_counter() - start
    return res


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
