"""Built-in continuous systems with analytic derivatives."""

import numpy as np
from scipy.optimize import brentq

from .continuous import ForcedLagrangianSystem


def damped_oscillator(m=1.0, k=1.0, r=0.1):
    """``L = m v^2/2 - k q^2/2`` with Rayleigh potential ``R = r v^2/2``."""
    return ForcedLagrangianSystem(
        n=1,
        lagrangian=lambda q, v: 0.5 * m * (v @ v) - 0.5 * k * (q @ q),
        rayleigh=lambda q, v: 0.5 * r * (v @ v),
        dL_dq=lambda q, v: -k * q,
        dL_dv=lambda q, v: m * v,
        d2L_dv2=lambda q, v: np.array([[m]]),
        d2L_dvdq=lambda q, v: np.zeros((1, 1)),
        dR_dv=lambda q, v: r * v,
        natural=True,
        mass=np.array([[m]]),
        name="damped oscillator",
    )


def position_dependent_oscillator(m=1.0, k=1.0):
    """Oscillator driven by ``f_L = -q q'``, a force with no Rayleigh potential."""
    return ForcedLagrangianSystem(
        n=1,
        lagrangian=lambda q, v: 0.5 * m * (v @ v) - 0.5 * k * (q @ q),
        force=lambda q, v: -q * v,
        dL_dq=lambda q, v: -k * q,
        dL_dv=lambda q, v: m * v,
        d2L_dv2=lambda q, v: np.array([[m]]),
        d2L_dvdq=lambda q, v: np.zeros((1, 1)),
        natural=True,
        mass=np.array([[m]]),
        name="position-dependent drag",
    )


def free_particle(m=1.0, n=1):
    """``L = m |v|^2 / 2`` with no force."""
    M = m * np.eye(n)
    return ForcedLagrangianSystem(
        n=n,
        lagrangian=lambda q, v: 0.5 * m * (v @ v),
        dL_dq=lambda q, v: np.zeros(n),
        dL_dv=lambda q, v: m * v,
        d2L_dv2=lambda q, v: M,
        d2L_dvdq=lambda q, v: np.zeros((n, n)),
        natural=True,
        mass=M,
        name="free particle",
    )


def double_well_potential(q):
    """``V(q) = |q|^2 (|q|^2 - 1)^2``."""
    s = q @ q
    return s * (s - 1.0) ** 2


def double_well_gradient(q):
    s = q @ q
    return 2.0 * (s - 1.0) * (3.0 * s - 1.0) * q


def marsden_west(k=1e-3):
    """Planar double well ``L = |v|^2/2 - V(q)`` with ``R = k |v|^2 / 2``."""
    I = np.eye(2)
    return ForcedLagrangianSystem(
        n=2,
        lagrangian=lambda q, v: 0.5 * (v @ v) - double_well_potential(q),
        rayleigh=lambda q, v: 0.5 * k * (v @ v),
        dL_dq=lambda q, v: -double_well_gradient(q),
        dL_dv=lambda q, v: v.copy(),
        d2L_dv2=lambda q, v: I,
        d2L_dvdq=lambda q, v: np.zeros((2, 2)),
        dR_dv=lambda q, v: k * v,
        natural=True,
        mass=I,
        name="Marsden-West double well",
    )


def marsden_west_initial_state(potential=0.15):
    """``q0 = (0, y)`` with ``V(0, y) = potential`` and ``v0 = (1/2, 0)``.

    ``y^2 (y^2 - 1)^2`` is below 4/27 on ``[0, 1]``, so for the default
    level the root lies on ``[1, 2]``; the total energy is then
    ``1/8 + potential``.
    """
    y = brentq(lambda y: y * y * (y * y - 1.0) ** 2 - potential, 1.0, 2.0, xtol=1e-15)
    return np.array([0.0, y]), np.array([0.5, 0.0])


def radial_well(r):
    return r * r * (r * r - 1.0) ** 2


def radial_well_derivative(r):
    return 2.0 * r * (r * r - 1.0) * (3.0 * r * r - 1.0)


def polar_double_well(c=1e-2):
    """Double well in polar coordinates ``q = (r, theta)`` with radial damping.

    ``L = (r'^2 + r^2 theta'^2)/2 - V(r)`` and ``R = c r'^2 / 2``, so the
    dissipation does not depend on the angle and angular momentum
    ``r^2 theta'`` is conserved.
    """
    def lagrangian(q, v):
        return 0.5 * (v[0] ** 2 + q[0] ** 2 * v[1] ** 2) - radial_well(q[0])

    return ForcedLagrangianSystem(
        n=2,
        lagrangian=lagrangian,
        rayleigh=lambda q, v: 0.5 * c * v[0] ** 2,
        dL_dq=lambda q, v: np.array([q[0] * v[1] ** 2 - radial_well_derivative(q[0]), 0.0]),
        dL_dv=lambda q, v: np.array([v[0], q[0] ** 2 * v[1]]),
        d2L_dv2=lambda q, v: np.diag([1.0, q[0] ** 2]),
        d2L_dvdq=lambda q, v: np.array([[0.0, 0.0], [2.0 * q[0] * v[1], 0.0]]),
        dR_dv=lambda q, v: np.array([c * v[0], 0.0]),
        natural=True,
        name="polar double well",
    )
