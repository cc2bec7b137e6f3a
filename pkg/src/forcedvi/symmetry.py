"""Discrete Noether theory: lifted generators, momentum maps and force conditions."""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .derivatives import as_vector, directional_derivative, jacobian
from .discrete import momentum_minus, momentum_plus


@dataclass(frozen=True)
class SymmetryGenerator:
    """Infinitesimal generator ``xi_Q`` as a vector field on configuration space."""

    field: Callable
    label: str = ""
    field_jacobian: Optional[Callable] = None

    def __call__(self, q):
        return as_vector(self.field(as_vector(q)))

    def jacobian(self, q):
        if self.field_jacobian is not None:
            return np.atleast_2d(self.field_jacobian(as_vector(q)))
        return jacobian(self, q)

    def complete_lift(self, q0, q1):
        """``(xi(q0), xi(q1))`` on ``Q x Q``."""
        return self(q0), self(q1)

    def hat_lift(self, q0, q1):
        """``(xi(q0), -xi(q1))`` on ``Q x Q``."""
        return self(q0), -self(q1)


def translation(n, axis, label=None):
    e = np.zeros(n)
    e[axis] = 1.0
    return SymmetryGenerator(lambda q: e.copy(), label or "d/dq%d" % axis,
                             lambda q: np.zeros((n, n)))


def planar_rotation(label="rotation"):
    """``xi(x, y) = (-y, x)``."""
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    return SymmetryGenerator(lambda q: A @ q, label, lambda q: A)


def axis_rotation(axis, label=None):
    """``xi(q) = axis x q`` in three dimensions."""
    w = as_vector(axis)
    A = np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    return SymmetryGenerator(lambda q: A @ q, label or "rotation about %s" % w, lambda q: A)


def lie_bracket(xi, eta, label=None):
    """Jacobi-Lie bracket ``[xi, eta](q) = D eta(q) xi(q) - D xi(q) eta(q)``."""
    def field(q):
        return eta.jacobian(q) @ xi(q) - xi.jacobian(q) @ eta(q)

    return SymmetryGenerator(field, label or "[%s, %s]" % (xi.label, eta.label))


def momentum_map(sys, xi, pair, side="plus"):
    """Forced discrete momentum paired with the generator on the matching leg."""
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    if side == "plus":
        return float(momentum_plus(sys, q0, q1) @ xi(q1))
    if side == "minus":
        return float(momentum_minus(sys, q0, q1) @ xi(q0))
    raise ValueError("side must be 'plus' or 'minus'")


def force_pairing(sys, xi, pair):
    """``f_d(xi_{QxQ}) = f_minus . xi(q0) + f_plus . xi(q1)``."""
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    return float(sys.f_minus(q0, q1) @ xi(q0) + sys.f_plus(q0, q1) @ xi(q1))


def rayleigh_pairing(sys, xi, pair):
    """Derivative of ``R_d`` along the hat lift, computed from ``R_d`` values alone."""
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    n = q0.size
    x0, x1 = xi.hat_lift(q0, q1)
    return directional_derivative(lambda z: sys.R(z[:n], z[n:]),
                                  np.concatenate([q0, q1]), np.concatenate([x0, x1]))


def lagrangian_variation(sys, xi, pair):
    """Derivative of ``L_d`` along the complete lift, computed from ``L_d`` values alone."""
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    n = q0.size
    x0, x1 = xi.complete_lift(q0, q1)
    return directional_derivative(lambda z: sys.L(z[:n], z[n:]),
                                  np.concatenate([q0, q1]), np.concatenate([x0, x1]))


def noether_residual(sys, xi, pair):
    """``xi_{QxQ}(L_d) + f_d(xi_{QxQ})``; zero means the momentum map is conserved."""
    return lagrangian_variation(sys, xi, pair) + force_pairing(sys, xi, pair)


def momentum_jump(sys, xi, pair):
    """``J_plus - J_minus`` at a pair, which equals :func:`noether_residual`."""
    return momentum_map(sys, xi, pair, "plus") - momentum_map(sys, xi, pair, "minus")


def conserved_drift(traj, sys, xi):
    """``max_k |J(q_k, q_{k+1}) - J(q_0, q_1)|`` with the right momentum map."""
    q = traj.configs
    if len(q) < 2:
        return 0.0
    J = np.array([momentum_map(sys, xi, (q[k], q[k + 1]), "plus") for k in range(len(q) - 1)])
    return float(np.max(np.abs(J - J[0])))


def momentum_series(traj, sys, xi):
    q = traj.configs
    return np.array([momentum_map(sys, xi, (q[k], q[k + 1]), "plus") for k in range(len(q) - 1)])


def _force_form(sys):
    def omega(z):
        n = z.size // 2
        return np.concatenate([sys.f_minus(z[:n], z[n:]), sys.f_plus(z[:n], z[n:])])
    return omega


def subalgebra_conditions(sys, xi, pair):
    """``(|f_d(xi_{QxQ})|, |i_{xi_{QxQ}} d f_d|_inf)`` at one pair.

    The force 1-form has components ``(f_minus, f_plus)`` on ``Q x Q``; its
    exterior derivative is the antisymmetrized Jacobian.
    """
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    z = np.concatenate([q0, q1])
    X = np.concatenate(xi.complete_lift(q0, q1))
    omega = _force_form(sys)
    J = jacobian(omega, z)
    c1 = abs(float(omega(z) @ X))
    c2 = float(np.max(np.abs((J - J.T) @ X)))
    return c1, c2


class ConditionSummary(NamedTuple):
    label: str
    max_pairing: float
    max_contraction: float
    worst_pair: tuple

    def passes(self, tol):
        return max(self.max_pairing, self.max_contraction) <= tol


@dataclass
class SubalgebraReport:
    xi: ConditionSummary
    eta: ConditionSummary
    bracket: ConditionSummary
    tol: float

    @property
    def generators_pass(self):
        return self.xi.passes(self.tol) and self.eta.passes(self.tol)

    @property
    def closed(self):
        """True unless both generators pass while their bracket fails."""
        return not self.generators_pass or self.bracket.passes(self.tol)


def _summarize(sys, gen, pairs):
    worst, where, c1max, c2max = -1.0, None, 0.0, 0.0
    for q0, q1 in pairs:
        c1, c2 = subalgebra_conditions(sys, gen, (q0, q1))
        c1max, c2max = max(c1max, c1), max(c2max, c2)
        if max(c1, c2) > worst:
            worst, where = max(c1, c2), (q0.copy(), q1.copy())
    return ConditionSummary(gen.label, c1max, c2max, where)


def subalgebra_check(sys, xi, eta, pairs, tol=1e-6):
    """Evaluate both force conditions for ``xi``, ``eta`` and ``[xi, eta]``.

    The conditions are linear in the generator, so the sign convention of
    the bracket does not affect the outcome.
    """
    bracket = lie_bracket(xi, eta)
    return SubalgebraReport(_summarize(sys, xi, pairs), _summarize(sys, eta, pairs),
                            _summarize(sys, bracket, pairs), tol)
