"""Shared fixtures: tasks are session-scoped so numba compiles once."""

import numpy as np
import pytest

from aurora_qd import AirHockeyTask, BallisticTask


@pytest.fixture(scope="session")
def ballistic_task():
    return BallisticTask()


@pytest.fixture(scope="session")
def airhockey_task():
    task = AirHockeyTask()
    # Trigger numba compilation outside of any timed test.
    task.simulate(np.zeros(8))
    return task


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
