"""Continuous forced Lagrangian and Hamiltonian dynamics.

These are the reference dynamics the discrete integrators are measured
against: the forced Euler-Lagrange right-hand side, energy, the Legendre
transform, Rayleigh forces and the classical integrators.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .derivatives import as_vector, gradient, jacobian
from .errors import ConvergenceError, DivergenceError, NumericDomainError, RegularityError

FD_SINGULAR = 1e-7
COND_LIMIT = 1e12


class TangentState(NamedTuple):
    q: np.ndarray
    v: np.ndarray


class CotangentState(NamedTuple):
    q: np.ndarray
    p: np.ndarray


def tangent_state(q, v):
    q, v = as_vector(q), as_vector(v)
    if q.shape != v.shape:
        raise ValueError("q and v must have the same length")
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
        raise NumericDomainError("non-finite tangent state")
    return TangentState(q, v)


def cotangent_state(q, p):
    q, p = as_vector(q), as_vector(p)
    if q.shape != p.shape:
        raise ValueError("q and p must have the same length")
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
        raise NumericDomainError("non-finite cotangent state")
    return CotangentState(q, p)


def _ensure_finite(x, what):
    if not np.all(np.isfinite(x)):
        raise NumericDomainError("non-finite %s" % what)
    return x


@dataclass(frozen=True)
class ForcedLagrangianSystem:
    """A Lagrangian ``L(q, v)`` with an external force covector ``f_L(q, v)``.

    If ``rayleigh`` is given and ``force`` is not, the force is
    ``-grad_v R``. Analytic derivative providers are optional; missing
    ones fall back to central differences. ``natural`` marks
    kinetic-minus-potential Lagrangians and ``mass`` (if given) is the
    constant velocity Hessian, used for initial guesses and for an exact
    inverse Legendre transform.
    """

    n: int
    lagrangian: Callable
    force: Optional[Callable] = None
    rayleigh: Optional[Callable] = None
    dL_dq: Optional[Callable] = None
    dL_dv: Optional[Callable] = None
    d2L_dv2: Optional[Callable] = None
    d2L_dvdq: Optional[Callable] = None
    dR_dv: Optional[Callable] = None
    natural: bool = False
    mass: Optional[np.ndarray] = None
    name: str = ""

    def L(self, q, v):
        return float(self.lagrangian(as_vector(q), as_vector(v)))

    def grad_q(self, q, v):
        q, v = as_vector(q), as_vector(v)
        if self.dL_dq is not None:
            return as_vector(self.dL_dq(q, v))
        return gradient(lambda x: self.lagrangian(x, v), q)

    def grad_v(self, q, v):
        q, v = as_vector(q), as_vector(v)
        if self.dL_dv is not None:
            return as_vector(self.dL_dv(q, v))
        return gradient(lambda x: self.lagrangian(q, x), v)

    def velocity_hessian(self, q, v):
        """``W[i, j] = d2L / dv_i dv_j``."""
        q, v = as_vector(q), as_vector(v)
        if self.d2L_dv2 is not None:
            return np.atleast_2d(np.asarray(self.d2L_dv2(q, v), dtype=float))
        if self.mass is not None:
            return np.atleast_2d(np.asarray(self.mass, dtype=float))
        return jacobian(lambda x: self.grad_v(q, x), v)

    def mixed_hessian(self, q, v):
        """``C[i, j] = d2L / dv_i dq_j``."""
        q, v = as_vector(q), as_vector(v)
        if self.d2L_dvdq is not None:
            return np.atleast_2d(np.asarray(self.d2L_dvdq(q, v), dtype=float))
        return jacobian(lambda x: self.grad_v(x, v), q)

    def R(self, q, v):
        if self.rayleigh is None:
            return 0.0
        return float(self.rayleigh(as_vector(q), as_vector(v)))

    def rayleigh_grad_v(self, q, v):
        q, v = as_vector(q), as_vector(v)
        if self.rayleigh is None:
            return np.zeros_like(v)
        if self.dR_dv is not None:
            return as_vector(self.dR_dv(q, v))
        return gradient(lambda x: self.rayleigh(q, x), v)

    def f(self, q, v):
        """External force covector at ``(q, v)``."""
        q, v = as_vector(q), as_vector(v)
        if self.force is not None:
            return _ensure_finite(as_vector(self.force(q, v)), "force")
        if self.rayleigh is not None:
            return -self.rayleigh_grad_v(q, v)
        return np.zeros_like(v)


@dataclass(frozen=True)
class ForcedHamiltonianSystem:
    """A Hamiltonian ``H(q, p)`` with a semibasic force ``beta(q, p)``."""

    n: int
    hamiltonian: Callable
    beta: Optional[Callable] = None
    dH_dq: Optional[Callable] = None
    dH_dp: Optional[Callable] = None


def rayleigh_force(R, s, grad_v=None):
    """Force generated by a Rayleigh potential, ``-grad_v R(q, v)``."""
    q, v = as_vector(s[0]), as_vector(s[1])
    if grad_v is not None:
        g = as_vector(grad_v(q, v))
    else:
        g = gradient(lambda x: R(q, x), v)
    return -_ensure_finite(g, "Rayleigh gradient")


def energy(sys, s):
    """``E = v . dL/dv - L``."""
    q, v = as_vector(s[0]), as_vector(s[1])
    return float(v @ sys.grad_v(q, v) - sys.L(q, v))


def legendre(sys, s):
    """Fibre derivative ``(q, v) -> (q, dL/dv)``."""
    q, v = as_vector(s[0]), as_vector(s[1])
    return CotangentState(q, sys.grad_v(q, v))


def legendre_inverse(sys, q, p, tol=1e-13, max_iter=50):
    """Velocity ``v`` with ``dL/dv(q, v) = p``."""
    q, p = as_vector(q), as_vector(p)
    if sys.mass is not None:
        return np.linalg.solve(np.atleast_2d(sys.mass), p)
    v = np.zeros_like(p)
    r = sys.grad_v(q, v) - p
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol * max(1.0, np.max(np.abs(p))):
            return v
        v = v - _solve_regular(sys.velocity_hessian(q, v), r)
        r = sys.grad_v(q, v) - p
    raise ConvergenceError("inverse Legendre transform did not converge",
                           float(np.max(np.abs(r))))


def _solve_regular(W, rhs):
    W = np.atleast_2d(W)
    sv = np.linalg.svd(W, compute_uv=False)
    # a finite-difference Hessian of a degenerate Lagrangian is noise, not exactly zero
    if sv[-1] <= FD_SINGULAR * max(1.0, sv[0]) or sv[0] > COND_LIMIT * sv[-1]:
        raise RegularityError("velocity Hessian is singular or badly conditioned")
    return np.linalg.solve(W, rhs)


def _acceleration(sys, q, v, force):
    rhs = sys.grad_q(q, v) - sys.mixed_hessian(q, v) @ v + force
    return _solve_regular(sys.velocity_hessian(q, v), rhs)


def forced_el_rhs(sys, s):
    """Acceleration solving the forced Euler-Lagrange equations at ``s``."""
    q, v = as_vector(s[0]), as_vector(s[1])
    return _acceleration(sys, q, v, sys.f(q, v))


def el_rhs(sys, s):
    """Acceleration of the unforced Euler-Lagrange equations."""
    q, v = as_vector(s[0]), as_vector(s[1])
    return _acceleration(sys, q, v, np.zeros_like(v))


def forced_hamilton_rhs(sys, s):
    """``(dq/dt, dp/dt) = (dH/dp, -(dH/dq + beta))``."""
    q, p = as_vector(s[0]), as_vector(s[1])
    if sys.dH_dp is not None:
        dq = as_vector(sys.dH_dp(q, p))
    else:
        dq = gradient(lambda x: sys.hamiltonian(q, x), p)
    if sys.dH_dq is not None:
        hq = as_vector(sys.dH_dq(q, p))
    else:
        hq = gradient(lambda x: sys.hamiltonian(x, p), q)
    beta = np.zeros_like(q) if sys.beta is None else as_vector(sys.beta(q, p))
    return dq, -(hq + beta)


@dataclass(frozen=True)
class Trajectory:
    """Configurations and velocities sampled at ``t_k = k h``."""

    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    method: str

    def momenta(self, sys):
        return np.array([sys.grad_v(q, v) for q, v in zip(self.q, self.v)])

    def energies(self, sys):
        return np.array([energy(sys, (q, v)) for q, v in zip(self.q, self.v)])


def first_order_rhs(sys):
    """First-order form ``y = (q, v) -> (v, a)`` of the forced EL equations."""
    n = sys.n

    def rhs(t, y):
        q, v = y[:n], y[n:]
        return np.concatenate([v, forced_el_rhs(sys, (q, v))])

    return rhs


def reference_integrate(sys, s0, h, N, method="rk4"):
    """Integrate the forced EL equations with a classical method.

    ``euler`` and ``rk4`` are fixed-step. ``benchmark`` is an adaptive
    eighth-order Dormand-Prince solve at tolerance 1e-12 sampled on the
    same grid, used as ground truth.
    """
    if h <= 0 or N < 1:
        raise ValueError("need h > 0 and N >= 1")
    q0, v0 = tangent_state(*s0)
    n = q0.size
    rhs = first_order_rhs(sys)
    t = h * np.arange(N + 1)
    y = np.empty((N + 1, 2 * n))
    y[0] = np.concatenate([q0, v0])
    if method == "benchmark":
        sol = solve_ivp(rhs, (0.0, t[-1]), y[0], method="DOP853", t_eval=t,
                        rtol=1e-12, atol=1e-12)
        if sol.status != 0 or sol.y.shape[1] != N + 1 or not np.all(np.isfinite(sol.y)):
            good = sol.y.shape[1] if sol.y.size else 0
            raise DivergenceError("benchmark integration failed: %s" % sol.message, step=good)
        y = sol.y.T
    elif method in ("euler", "rk4"):
        # overflow shows up as non-finite state and is reported as divergence below
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(N):
                yk = y[k]
                try:
                    if method == "euler":
                        y[k + 1] = yk + h * rhs(t[k], yk)
                    else:
                        k1 = rhs(t[k], yk)
                        k2 = rhs(t[k] + h / 2, yk + h / 2 * k1)
                        k3 = rhs(t[k] + h / 2, yk + h / 2 * k2)
                        k4 = rhs(t[k] + h, yk + h * k3)
                        y[k + 1] = yk + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
                except (NumericDomainError, RegularityError, FloatingPointError) as exc:
                    raise DivergenceError("%s failed at step %d: %s" % (method, k + 1, exc), step=k + 1)
                if not np.all(np.isfinite(y[k + 1])):
                    raise DivergenceError("%s diverged at step %d" % (method, k + 1), step=k + 1)
    else:
        raise ValueError("unknown method %r" % method)
    return Trajectory(t, y[:, :n].copy(), y[:, n:].copy(), method)
