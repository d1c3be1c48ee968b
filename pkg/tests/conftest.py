import sys

import numpy as np
import pytest

from evosg.weighted_time import TimeGrid, WeightedSignal


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gaussian(grid, rho, center=0.0, width=1.0, vec=(1.0,)):
    t = grid.times
    prof = np.exp(-((t - center) / width) ** 2)
    return WeightedSignal(grid, rho, np.outer(prof, np.asarray(vec, dtype=complex)))


def bump(t, center=0.0, width=1.0):
    x = (t - center) / width
    out = np.zeros_like(t, dtype=float)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def random_signal(rng, grid, rho, dim, lo=-2.0, hi=2.0):
    """Random smooth signal supported in [lo, hi]."""
    t = grid.times
    vals = np.zeros((grid.n_points, dim), dtype=complex)
    for _ in range(3):
        w = rng.uniform(0.2, 0.4) * (hi - lo)
        c = rng.uniform(lo + w, hi - w)
        vals += np.outer(bump(t, c, w), rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    return WeightedSignal(grid, rho, vals)


@pytest.fixture
def grid():
    return TimeGrid.covering(-8.0, 24.0, 1 << 12)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULT_LINES:
            terminalreporter.write_line(line)
