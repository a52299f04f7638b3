import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from womsim.ensembles import RngStream

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**63 - 1)

# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_hermitian(rng: RngStream, n: int) -> np.ndarray:
    g = rng.complex_normal((n, n))
    return 0.5 * (g + g.conj().T)


@pytest.fixture
def rng():
    return RngStream(20240611, 0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
