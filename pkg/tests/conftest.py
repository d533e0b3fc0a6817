import numpy as np
import pytest

# one line per acceptance criterion, echoed in the terminal summary
CRITERION_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_bump(r, center, width):
    """C-infinity bump supported on |r - center| < width."""
    t = (np.asarray(r, float) - center) / width
    return np.where(np.abs(t) < 1.0,
                    np.exp(1.0 - 1.0 / np.maximum(1e-300, 1.0 - t**2)), 0.0)
