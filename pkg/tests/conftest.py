import numpy as np
import pytest

from wvfi.config import ArchConfig
from wvfi.weights import init_weights


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tiny_weights():
    return init_weights(ArchConfig.tiny(), seed=7)


def piecewise_frame(rng, size, rects=2):
    """Flat background with a few constant rectangles."""
    h, w = size
    img = np.empty((3, h, w), np.float32)
    img[:] = rng.uniform(0, 1, (3, 1, 1))
    for _ in range(rects):
        y0, x0 = rng.integers(0, h // 2), rng.integers(0, w // 2)
        rh, rw = rng.integers(h // 8, h // 2), rng.integers(w // 8, w // 2)
        img[:, y0 : y0 + rh, x0 : x0 + rw] = rng.uniform(0, 1, (3, 1, 1))
    return img


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
