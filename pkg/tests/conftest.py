import numpy as np
import pytest
from hypothesis import settings

from forcedvi.continuous import ForcedLagrangianSystem
from forcedvi.discrete import DiscreteForcedSystem
from forcedvi.discretizers import exact_damped_oscillator, midpoint_discretize
from forcedvi.systems import damped_oscillator, free_particle

settings.register_profile("forcedvi", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("forcedvi")

# filled by tests/test_acceptance.py and printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def free_particle_discrete(m=1.0, h=1.0, n=1):
    """``L_d = (h/2) m |(q1 - q0)/h|^2`` with no force."""
    return DiscreteForcedSystem(
        n=n, h=h,
        lagrangian=lambda q0, q1: 0.5 * h * m * float((q1 - q0) @ (q1 - q0)) / h ** 2,
        d1L=lambda q0, q1: -m * (q1 - q0) / h,
        d2L=lambda q0, q1: m * (q1 - q0) / h,
        mass=m * np.eye(n),
        name="discrete free particle",
    )


def skew_drag_system(h=0.1):
    """2D oscillator with a non-symmetric linear drag, so momentum Jacobians are not symmetric."""
    A = np.array([[0.1, 0.4], [-0.2, 0.3]])
    cont = ForcedLagrangianSystem(n=2, lagrangian=lambda q, v: 0.5 * v @ v - 0.5 * q @ q,
                                  force=lambda q, v: -A @ v, mass=np.eye(2))
    return midpoint_discretize(cont, h)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def free_discrete():
    return free_particle_discrete()


@pytest.fixture
def midpoint_undamped():
    return midpoint_discretize(damped_oscillator(1.0, 1.0, 0.0), 0.1)


@pytest.fixture
def midpoint_damped():
    return midpoint_discretize(damped_oscillator(1.0, 1.0, 0.1), 0.1)


@pytest.fixture
def exact_damped():
    return exact_damped_oscillator(1.0, 1.0, 0.1, 0.1)


@pytest.fixture
def free_continuous():
    return free_particle()
