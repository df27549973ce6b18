import numpy as np
import pytest

from bandspec.catalog import load_example

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def shift():
    return load_example("shift")


@pytest.fixture(scope="session")
def example_b():
    return load_example("example_b")


@pytest.fixture(scope="session")
def example_c():
    return load_example("example_c")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def circulant_shift_sigma():
    """sigma_min(C - 2I) for the 2048-point cyclic shift C: an independent
    finite-section value of the lower norm of (shift - 2)."""
    N = 2048
    C = np.roll(np.eye(N), 1, axis=0).astype(complex)
    return float(np.linalg.svd(C - 2 * np.eye(N), compute_uv=False).min())
