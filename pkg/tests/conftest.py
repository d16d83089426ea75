import numpy as np
import pytest

from imfsic.signal_model import build_qam

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def qam4():
    return build_qam(4)


@pytest.fixture
def qam16():
    return build_qam(16)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_instance(rng, nt, nr, c, sigma2):
    """(H, symbol indices, y) for one noisy draw."""
    h = crandn(rng, nr, nt)
    idx = rng.integers(0, c.size, nt)
    y = h @ c.points[idx] + np.sqrt(sigma2) * crandn(rng, nr)
    return h, idx, y
