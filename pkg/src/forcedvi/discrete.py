"""Forced discrete mechanics: stepping, Legendre transforms, discrete Hamiltonians.

A discrete system is a discrete Lagrangian ``L_d(q0, q1)`` together with
two force legs ``f_plus(q0, q1)`` and ``f_minus(q0, q1)``. When a discrete
Rayleigh potential ``R_d`` is supplied the legs default to
``f_plus = -D2 R_d`` and ``f_minus = D1 R_d``.
"""

import dataclasses
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .continuous import CotangentState, legendre
from .derivatives import as_vector, gradient, jacobian
from .errors import (ContractError, ConvergenceError, DivergenceError,
                     NumericDomainError, RegularityError)


@dataclass(frozen=True)
class SolverConfig:
    """Newton settings shared by every implicit solve."""

    tol: float = 1e-12
    max_iter: int = 50
    cond_limit: float = 1e12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("need at least one Newton iteration")


DEFAULT_SOLVER = SolverConfig()


def newton(F, x0, cfg=DEFAULT_SOLVER, what="Newton solve", jac=None):
    """Solve ``F(x) = 0`` to ``cfg.tol`` in the max-norm."""
    x = as_vector(x0)
    jac = jac or (lambda y: jacobian(F, y))
    res = np.inf
    for it in range(cfg.max_iter + 1):
        r = np.atleast_1d(F(x))
        if not np.all(np.isfinite(r)):
            raise NumericDomainError("non-finite residual in %s" % what)
        res = float(np.max(np.abs(r)))
        if res <= cfg.tol:
            return x
        if it == cfg.max_iter:
            break
        J = np.atleast_2d(jac(x))
        if not np.all(np.isfinite(J)) or np.linalg.cond(J) > cfg.cond_limit:
            raise RegularityError("singular Jacobian in %s" % what)
        x = x - np.linalg.solve(J, r)
    raise ConvergenceError("%s: no convergence after %d iterations (residual %.3e)"
                           % (what, cfg.max_iter, res), res)


@dataclass(frozen=True)
class DiscreteForcedSystem:
    """Discrete Lagrangian with forces on ``Q x Q``.

    Derivative providers ``d1L``, ``d2L``, ``d1R``, ``d2R`` are optional and
    fall back to central differences. ``mass`` is a constant mass matrix used
    only to build initial guesses for Legendre inversions.
    """

    n: int
    h: float
    lagrangian: Callable
    force_plus: Optional[Callable] = None
    force_minus: Optional[Callable] = None
    rayleigh: Optional[Callable] = None
    d1L: Optional[Callable] = None
    d2L: Optional[Callable] = None
    d1R: Optional[Callable] = None
    d2R: Optional[Callable] = None
    mass: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        if not self.h > 0:
            raise ContractError("step h must be positive")

    @property
    def is_rayleigh(self):
        return self.rayleigh is not None

    def L(self, q0, q1):
        return float(self.lagrangian(as_vector(q0), as_vector(q1)))

    def D1L(self, q0, q1):
        q0, q1 = as_vector(q0), as_vector(q1)
        if self.d1L is not None:
            return as_vector(self.d1L(q0, q1))
        return gradient(lambda x: self.lagrangian(x, q1), q0)

    def D2L(self, q0, q1):
        q0, q1 = as_vector(q0), as_vector(q1)
        if self.d2L is not None:
            return as_vector(self.d2L(q0, q1))
        return gradient(lambda x: self.lagrangian(q0, x), q1)

    def R(self, q0, q1):
        if self.rayleigh is None:
            return 0.0
        return float(self.rayleigh(as_vector(q0), as_vector(q1)))

    def D1R(self, q0, q1):
        q0, q1 = as_vector(q0), as_vector(q1)
        if self.rayleigh is None:
            return np.zeros_like(q0)
        if self.d1R is not None:
            return as_vector(self.d1R(q0, q1))
        return gradient(lambda x: self.rayleigh(x, q1), q0)

    def D2R(self, q0, q1):
        q0, q1 = as_vector(q0), as_vector(q1)
        if self.rayleigh is None:
            return np.zeros_like(q1)
        if self.d2R is not None:
            return as_vector(self.d2R(q0, q1))
        return gradient(lambda x: self.rayleigh(q0, x), q1)

    def f_plus(self, q0, q1):
        q0, q1 = as_vector(q0), as_vector(q1)
        if self.force_plus is not None:
            return as_vector(self.force_plus(q0, q1))
        if self.rayleigh is not None:
            return -self.D2R(q0, q1)
        return np.zeros_like(q1)

    def f_minus(self, q0, q1):
        q0, q1 = as_vector(q0), as_vector(q1)
        if self.force_minus is not None:
            return as_vector(self.force_minus(q0, q1))
        if self.rayleigh is not None:
            return self.D1R(q0, q1)
        return np.zeros_like(q0)

    def L_plus(self, q0, q1):
        """Modified Lagrangian ``L_d + R_d``."""
        return self.L(q0, q1) + self.R(q0, q1)

    def L_minus(self, q0, q1):
        """Modified Lagrangian ``L_d - R_d``."""
        return self.L(q0, q1) - self.R(q0, q1)

    def unforced(self):
        """The same discrete Lagrangian with all forces removed."""
        return dataclasses.replace(self, force_plus=None, force_minus=None,
                                   rayleigh=None, d1R=None, d2R=None)

    def _mass_inv(self, p):
        if self.mass is None:
            return None
        return np.linalg.solve(np.atleast_2d(self.mass), p)


def del_residual(sys, q_prev, q, q_next):
    """Forced discrete Euler-Lagrange residual at the triple."""
    return (sys.D2L(q_prev, q) + sys.D1L(q, q_next)
            + sys.f_plus(q_prev, q) + sys.f_minus(q, q_next))


def del_residual_modified(sys, q_prev, q, q_next):
    """The same residual written with the modified Lagrangians ``L_d -/+ R_d``."""
    if not sys.is_rayleigh:
        raise ContractError("modified-Lagrangian residual needs a Rayleigh potential")
    d2_minus = sys.D2L(q_prev, q) - sys.D2R(q_prev, q)
    d1_plus = sys.D1L(q, q_next) + sys.D1R(q, q_next)
    return d2_minus + d1_plus


def del_step(sys, q_prev, q, cfg=DEFAULT_SOLVER):
    """Solve the forced discrete EL equations for ``q_next``."""
    q_prev, q = as_vector(q_prev), as_vector(q)
    known = sys.D2L(q_prev, q) + sys.f_plus(q_prev, q)
    return newton(lambda x: known + sys.D1L(q, x) + sys.f_minus(q, x),
                  2.0 * q - q_prev, cfg, "discrete Euler-Lagrange step")


def del_step_backward(sys, q, q_next, cfg=DEFAULT_SOLVER):
    """Solve the forced discrete EL equations for ``q_prev``."""
    q, q_next = as_vector(q), as_vector(q_next)
    known = sys.D1L(q, q_next) + sys.f_minus(q, q_next)
    return newton(lambda x: sys.D2L(x, q) + sys.f_plus(x, q) + known,
                  2.0 * q - q_next, cfg, "backward discrete Euler-Lagrange step")


def momentum_plus(sys, q0, q1):
    """``D2 L_d + f_plus``; in Rayleigh form ``D2 (L_d - R_d)``."""
    if sys.is_rayleigh and sys.force_plus is None:
        return sys.D2L(q0, q1) - sys.D2R(q0, q1)
    return sys.D2L(q0, q1) + sys.f_plus(q0, q1)


def momentum_minus(sys, q0, q1):
    """``-D1 L_d - f_minus``; in Rayleigh form ``-D1 (L_d + R_d)``."""
    if sys.is_rayleigh and sys.force_minus is None:
        return -(sys.D1L(q0, q1) + sys.D1R(q0, q1))
    return -sys.D1L(q0, q1) - sys.f_minus(q0, q1)


def legendre_plus(sys, pair):
    """Right forced discrete Legendre transform ``(q0, q1) -> (q1, p_plus)``."""
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    return CotangentState(q1, momentum_plus(sys, q0, q1))


def legendre_minus(sys, pair):
    """Left forced discrete Legendre transform ``(q0, q1) -> (q0, p_minus)``."""
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    return CotangentState(q0, momentum_minus(sys, q0, q1))


def _guess(sys, q, p, sign):
    step = sys._mass_inv(p)
    return q.copy() if step is None else q + sign * sys.h * step


def legendre_minus_inverse(sys, q0, p0, cfg=DEFAULT_SOLVER):
    """``q1`` with ``momentum_minus(q0, q1) = p0``."""
    q0, p0 = as_vector(q0), as_vector(p0)
    return newton(lambda x: momentum_minus(sys, q0, x) - p0, _guess(sys, q0, p0, 1.0),
                  cfg, "inverse left Legendre transform")


def legendre_plus_inverse(sys, q1, p1, cfg=DEFAULT_SOLVER):
    """``q0`` with ``momentum_plus(q0, q1) = p1``, i.e. the inverse of the right transform."""
    q1, p1 = as_vector(q1), as_vector(p1)
    return newton(lambda x: momentum_plus(sys, x, q1) - p1, _guess(sys, q1, p1, -1.0),
                  cfg, "inverse right Legendre transform")


def solve_plus_second(sys, q0, p1, cfg=DEFAULT_SOLVER):
    """``q1`` with ``momentum_plus(q0, q1) = p1`` (the config hidden in the right Hamiltonian)."""
    q0, p1 = as_vector(q0), as_vector(p1)
    return newton(lambda x: momentum_plus(sys, q0, x) - p1, _guess(sys, q0, p1, 1.0),
                  cfg, "right Hamiltonian configuration recovery")


def solve_minus_first(sys, q1, p0, cfg=DEFAULT_SOLVER):
    """``q0`` with ``momentum_minus(q0, q1) = p0`` (the config hidden in the left Hamiltonian)."""
    q1, p0 = as_vector(q1), as_vector(p0)
    return newton(lambda x: momentum_minus(sys, x, q1) - p0, _guess(sys, q1, p0, -1.0),
                  cfg, "left Hamiltonian configuration recovery")


def hamiltonian_flow(sys, s, cfg=DEFAULT_SOLVER):
    """Discrete Hamiltonian flow ``(q_j, p_j) -> (q_{j+1}, p_{j+1})``."""
    q0, p0 = as_vector(s[0]), as_vector(s[1])
    q1 = legendre_minus_inverse(sys, q0, p0, cfg)
    return legendre_plus(sys, (q0, q1))


def lagrangian_flow(sys, pair, cfg=DEFAULT_SOLVER):
    """Discrete Lagrangian flow ``(q_{j-1}, q_j) -> (q_j, q_{j+1})``."""
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    p1 = momentum_plus(sys, q0, q1)
    return q1, legendre_minus_inverse(sys, q1, p1, cfg)


def momentum_jacobians(sys, q0, q1, side):
    """Partial Jacobians of a discrete momentum with respect to both legs.

    Returns ``(d/dq0, d/dq1)`` of ``momentum_plus`` or ``momentum_minus``.
    """
    q0, q1 = as_vector(q0), as_vector(q1)
    mom = momentum_plus if side == "plus" else momentum_minus
    d0 = jacobian(lambda x: mom(sys, x, q1), q0)
    d1 = jacobian(lambda x: mom(sys, q0, x), q1)
    return d0, d1


def discrete_hamiltonian(sys, side, q, p, cfg=DEFAULT_SOLVER):
    """Right or left discrete Hamiltonian.

    ``side='plus'``: ``H+(q_j, p_{j+1}) = p_{j+1} q_{j+1} - L_d(q_j, q_{j+1})``.
    ``side='minus'``: ``H-(q_{j+1}, p_j) = -p_j q_j - L_d(q_j, q_{j+1})``.
    The missing configuration is recovered by inverting the forced Legendre
    transform on the corresponding leg.
    """
    q, p = as_vector(q), as_vector(p)
    if side == "plus":
        x = solve_plus_second(sys, q, p, cfg)
        return float(p @ x - sys.L(q, x))
    if side == "minus":
        y = solve_minus_first(sys, q, p, cfg)
        return float(-p @ y - sys.L(y, q))
    raise ValueError("side must be 'plus' or 'minus'")


class HamiltonianGradients(NamedTuple):
    d1: np.ndarray
    d2: np.ndarray
    recovered: np.ndarray


def hamiltonian_gradients(sys, side, q, p, cfg=DEFAULT_SOLVER):
    """Partial derivatives of the discrete Hamiltonian, via the implicit function theorem.

    With forces the recovered configuration depends on ``(q, p)`` and the
    force leg contributes a term through that dependence.
    """
    q, p = as_vector(q), as_vector(p)
    if side == "plus":
        x = solve_plus_second(sys, q, p, cfg)
        K, J = momentum_jacobians(sys, q, x, "plus")
        w = np.linalg.solve(J.T, sys.f_plus(q, x))
        return HamiltonianGradients(-sys.D1L(q, x) - K.T @ w, x + w, x)
    if side == "minus":
        y = solve_minus_first(sys, q, p, cfg)
        A, B = momentum_jacobians(sys, y, q, "minus")
        w = np.linalg.solve(A.T, sys.f_minus(y, q))
        return HamiltonianGradients(-sys.D2L(y, q) - B.T @ w, -y + w, y)
    raise ValueError("side must be 'plus' or 'minus'")


def hamilton_eq_residuals(sys, side, q_j, p_j, q_j1, p_j1, cfg=DEFAULT_SOLVER,
                          convention="row"):
    """Residuals of the forced right (``plus``) or left (``minus``) discrete Hamilton equations.

    Right:  ``[q_{j+1} - D2H+] dp_{j+1}/dq_{j+1} + f_plus = 0`` and
    ``p_j - D1H+ + (dp_{j+1}/dq_j)^T [q_{j+1} - D2H+] + f_minus = 0``.
    Left:   ``[q_j + D2H-] dp_j/dq_j - f_minus = 0`` and
    ``p_{j+1} + D1H- + (dp_j/dq_{j+1})^T [q_j + D2H-] - f_plus = 0``.

    The bracket is a row vector multiplying the Jacobian, so in column
    form the Jacobian enters transposed (``convention='row'``); the
    ``'column'`` convention is kept to demonstrate that it fails for
    non-symmetric Jacobians. The second equation carries the coupling term
    through which the first bracket feeds into ``p_j``; it vanishes
    whenever the first residual does with zero force.
    """
    q_j, p_j, q_j1, p_j1 = map(as_vector, (q_j, p_j, q_j1, p_j1))

    def act(M, x):
        return M.T @ x if convention == "row" else M @ x

    if side == "plus":
        g = hamiltonian_gradients(sys, "plus", q_j, p_j1, cfg)
        K, J = momentum_jacobians(sys, q_j, q_j1, "plus")
        gap = q_j1 - g.d2
        res_a = act(J, gap) + sys.f_plus(q_j, q_j1)
        res_b = p_j - g.d1 + act(K, gap) + sys.f_minus(q_j, q_j1)
        return res_a, res_b
    if side == "minus":
        g = hamiltonian_gradients(sys, "minus", q_j1, p_j, cfg)
        A, B = momentum_jacobians(sys, q_j, q_j1, "minus")
        gap = q_j + g.d2
        res_a = act(A, gap) - sys.f_minus(q_j, q_j1)
        res_b = p_j1 + g.d1 + act(B, gap) - sys.f_plus(q_j, q_j1)
        return res_a, res_b
    raise ValueError("side must be 'plus' or 'minus'")


def rayleigh_expand(sys, rayleigh, d1R=None, d2R=None):
    """Attach a discrete Rayleigh potential; the forces become its partial gradients."""
    return dataclasses.replace(sys, rayleigh=rayleigh, d1R=d1R, d2R=d2R,
                               force_plus=None, force_minus=None)


def sample_pairs(n, region=(-2.0, 2.0), samples=50, seed=0):
    """Uniform random pairs in ``region^n x region^n``, shape ``(samples, 2, n)``."""
    rng = np.random.default_rng(seed)
    return rng.uniform(region[0], region[1], size=(samples, 2, n))


def rayleigh_defect(force_plus, force_minus, q0, q1, step=None):
    """Closedness defect of the force 1-form at one pair.

    The 1-form ``f_minus dq0 - f_plus dq1`` is exact (the forces come from a
    discrete Rayleigh potential) iff its Jacobian is symmetric. In one
    dimension the only entry is ``D1 f_plus + D2 f_minus``.
    """
    q0, q1 = as_vector(q0), as_vector(q1)
    n = q0.size

    def omega(z):
        return np.concatenate([force_minus(z[:n], z[n:]), -force_plus(z[:n], z[n:])])

    Jw = jacobian(omega, np.concatenate([q0, q1]), step)
    return float(np.max(np.abs(Jw - Jw.T)))


def check_rayleigh_condition(sys, region=(-2.0, 2.0), samples=50, seed=0, pairs=None):
    """Largest Rayleigh-condition defect of ``sys``'s forces over sampled pairs."""
    if pairs is None:
        pairs = sample_pairs(sys.n, region, samples, seed)
    return max(rayleigh_defect(sys.f_plus, sys.f_minus, q0, q1) for q0, q1 in pairs)


def gauge_transform(sys, psi, phi0, phi1, dpsi=None, dphi0=None, dphi1=None):
    """Gauge-equivalent Rayleigh system.

    ``L~ = L + psi(q0) + phi1(q1) + phi0(q0) - psi(q1)`` and
    ``R~ = R + psi(q0) + phi1(q1) - phi0(q0) + psi(q1)``, so that
    ``L~ + R~ = L + R + 2 psi(q0) + 2 phi1(q1)`` and
    ``L~ - R~ = L - R + 2 phi0(q0) - 2 psi(q1)``; the discrete equations
    only see ``D1 (L + R)`` and ``D2 (L - R)``, which are unchanged.
    """
    if not sys.is_rayleigh:
        raise ContractError("gauge transform needs a Rayleigh potential")

    def grad_of(fun, dfun):
        if dfun is not None:
            return lambda q: as_vector(dfun(as_vector(q)))
        return lambda q: gradient(fun, q)

    gpsi, gphi0, gphi1 = grad_of(psi, dpsi), grad_of(phi0, dphi0), grad_of(phi1, dphi1)

    def lagrangian(q0, q1):
        return sys.L(q0, q1) + psi(q0) + phi1(q1) + phi0(q0) - psi(q1)

    def rayleigh(q0, q1):
        return sys.R(q0, q1) + psi(q0) + phi1(q1) - phi0(q0) + psi(q1)

    return dataclasses.replace(
        sys,
        lagrangian=lagrangian,
        rayleigh=rayleigh,
        force_plus=None,
        force_minus=None,
        d1L=lambda q0, q1: sys.D1L(q0, q1) + gpsi(q0) + gphi0(q0),
        d2L=lambda q0, q1: sys.D2L(q0, q1) + gphi1(q1) - gpsi(q1),
        d1R=lambda q0, q1: sys.D1R(q0, q1) + gpsi(q0) - gphi0(q0),
        d2R=lambda q0, q1: sys.D2R(q0, q1) + gphi1(q1) + gpsi(q1),
        name=sys.name + " (gauge)",
    )


class Seed(NamedTuple):
    """Initial data for :func:`run_trajectory`.

    Build with :meth:`pair`, :meth:`momentum` or :meth:`velocity`.
    """

    kind: str
    q0: np.ndarray
    second: np.ndarray
    continuous: object = None

    @classmethod
    def pair(cls, q0, q1):
        return cls("pair", as_vector(q0), as_vector(q1))

    @classmethod
    def momentum(cls, q0, p0):
        return cls("momentum", as_vector(q0), as_vector(p0))

    @classmethod
    def velocity(cls, q0, v0, continuous):
        return cls("velocity", as_vector(q0), as_vector(v0), continuous)


@dataclass(frozen=True)
class DiscreteTrajectory:
    """Discrete curve ``q_0..q_N`` with momenta and per-step diagnostics.

    ``momenta[0]`` is the left momentum of the first pair and
    ``momenta[k]`` (k >= 1) the right momentum of ``(q_{k-1}, q_k)``.
    Diagnostic arrays have length ``N + 1`` and are zero at endpoints where
    no triple exists.
    """

    configs: np.ndarray
    momenta: np.ndarray
    h: float
    diagnostics: dict

    @property
    def N(self):
        return len(self.configs) - 1

    @property
    def t(self):
        return self.h * np.arange(self.N + 1)


def seed_pair(sys, init, cfg=DEFAULT_SOLVER):
    """Resolve a :class:`Seed` (or a plain ``(q0, q1)`` tuple) to a pair."""
    if not isinstance(init, Seed):
        init = Seed.pair(*init)
    if init.kind == "pair":
        return init.q0, init.second
    if init.kind == "momentum":
        return init.q0, legendre_minus_inverse(sys, init.q0, init.second, cfg)
    if init.kind == "velocity":
        if init.continuous is None:
            raise ContractError("velocity seeding needs the continuous system")
        p0 = legendre(init.continuous, (init.q0, init.second)).p
        return init.q0, legendre_minus_inverse(sys, init.q0, p0, cfg)
    raise ContractError("unknown seed kind %r" % init.kind)


def run_trajectory(sys, init, N, cfg=DEFAULT_SOLVER):
    """Iterate the forced discrete EL step ``N - 1`` times from a seed pair."""
    if N < 1:
        raise ContractError("need N >= 1")
    q0, q1 = seed_pair(sys, init, cfg)
    configs = np.empty((N + 1, q0.size))
    configs[0], configs[1] = q0, q1
    for k in range(1, N):
        try:
            configs[k + 1] = del_step(sys, configs[k - 1], configs[k], cfg)
        except (ConvergenceError, RegularityError, NumericDomainError) as exc:
            raise DivergenceError("step %d: %s" % (k + 1, exc), step=k + 1) from exc
    momenta = np.empty_like(configs)
    momenta[0] = momentum_minus(sys, configs[0], configs[1])
    for k in range(1, N + 1):
        momenta[k] = momentum_plus(sys, configs[k - 1], configs[k])
    residual = np.zeros(N + 1)
    mismatch = np.zeros(N + 1)
    for k in range(1, N):
        residual[k] = np.max(np.abs(del_residual(sys, *configs[k - 1:k + 2])))
        mismatch[k] = np.max(np.abs(momenta[k] - momentum_minus(sys, configs[k], configs[k + 1])))
    diagnostics = {"residual_del": residual, "momentum_mismatch": mismatch}
    return DiscreteTrajectory(configs, momenta, sys.h, diagnostics)
