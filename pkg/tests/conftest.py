import numpy as np
import pytest

from certsynth.data import TrajectoryData
from certsynth.regions import HyperRectangle, SafetySpec


@pytest.fixture(scope="session")
def scalar_ct_data():
    """xdot = -x + u, open-loop stable scalar system."""
    rng = np.random.default_rng(0)
    a, b = np.array([[-1.0]]), np.array([[1.0]])
    x = rng.uniform(-1, 1, size=(1, 6))
    u = rng.uniform(-1, 1, size=(1, 6))
    return a, b, TrajectoryData(u0=u, x0=x, x1=a @ x + b @ u, time_domain="continuous")


@pytest.fixture(scope="session")
def scalar_dt_data():
    """x+ = 0.5 x + u."""
    rng = np.random.default_rng(1)
    a, b = np.array([[0.5]]), np.array([[1.0]])
    x = rng.uniform(-1, 1, size=(1, 6))
    u = rng.uniform(-0.3, 0.3, size=(1, 6))
    return a, b, TrajectoryData(u0=u, x0=x, x1=a @ x + b @ u, time_domain="discrete")


@pytest.fixture(scope="session")
def two_tank_ct():
    rng = np.random.default_rng(2)
    a = np.array([[-1.0, 0.0], [1.0, -1.0]])
    b = np.array([[0.5, 0.0], [0.0, 0.5]])
    x = rng.uniform(-1, 1, size=(2, 12))
    u = rng.uniform(-1, 1, size=(2, 12))
    data = TrajectoryData(u0=u, x0=x, x1=a @ x + b @ u, time_domain="continuous")
    spec = SafetySpec(
        state_space=HyperRectangle((-3, -3), (3, 3)),
        initial=HyperRectangle((-1, -1), (1, 1)),
        unsafe=(
            HyperRectangle((1.5, 1.5), (3, 3)),
            HyperRectangle((-3, -3), (-1.5, -1.5)),
        ),
    )
    return a, b, data, spec
