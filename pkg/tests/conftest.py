from __future__ import annotations

import numpy as np
import pytest

from synthbound.panel import InterventionSpec, PanelData


def make_panel(y, donors, times=None, names=None, treated="T"):
    donors = np.atleast_2d(np.asarray(donors, dtype=float))
    if donors.shape[0] != len(y):
        donors = donors.T
    names = list(names or [f"D{k}" for k in range(donors.shape[1])])
    times = list(times or range(1, len(y) + 1))
    return PanelData(times, [treated, *names], np.column_stack([y, donors]), treated, names)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_panel():
    t = np.arange(10, dtype=float)
    x = np.column_stack([t + 1.0, np.sin(t) + 3.0])
    return make_panel(0.5 * x[:, 0] + 0.5 * x[:, 1], x), InterventionSpec(6)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
