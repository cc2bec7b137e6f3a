"""Discrete Hamilton-Jacobi layer for forced systems.

An action family ``S^k`` on configuration space induces momentum maps

    gamma_plus(q0, q1)  = DS^{k+1}(q1) + f_plus(q0, q1)
    gamma_minus(q0, q1) = DS^k(q0)     - f_minus(q0, q1)

and the forced right/left discrete Hamilton-Jacobi residuals measure how
far ``S`` is from a solution. With forces present the two equations single
out different families: the action accumulated along the past of a
solution solves the right equation, the negative action-to-go solves the
left one. Both constructors are provided.
"""

import csv
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .derivatives import as_vector, gradient, jacobian
from .discrete import (DEFAULT_SOLVER, del_step, del_step_backward, discrete_hamiltonian,
                       hamilton_eq_residuals, hamiltonian_flow, hamiltonian_gradients,
                       legendre_plus_inverse, momentum_minus, momentum_plus, newton)
from .errors import ContractError, ConvergenceError, DivergenceError, NumericDomainError, RegularityError


class ActionFamily:
    """Indexed scalar functions ``S^k(q)`` with optional analytic gradients."""

    def __init__(self, value, grad=None, label=""):
        self.value = value
        self.grad = grad
        self.label = label

    def S(self, k, q):
        return float(self.value(k, as_vector(q)))

    def DS(self, k, q):
        q = as_vector(q)
        if self.grad is not None:
            return as_vector(self.grad(k, q))
        return gradient(lambda x: self.value(k, x), q)

    def hessian(self, k, q):
        return jacobian(lambda x: self.DS(k, x), as_vector(q))


class SummedAction(ActionFamily):
    """Action accumulated along a known past ``c_0, c_1, ...``.

    ``S^0 = 0`` and ``S^k(q) = sum_{i<k-1} L_d(c_i, c_{i+1}) + L_d(c_{k-1}, q)``,
    so ``DS^k(q) = D2 L_d(c_{k-1}, q)``. This family solves the forced right
    Hamilton-Jacobi equation on pairs that start on the history.
    """

    def __init__(self, sys, history):
        self.sys = sys
        self.history = tuple(as_vector(c) for c in history)
        sums = [0.0]
        for a, b in zip(self.history[:-1], self.history[1:]):
            sums.append(sums[-1] + sys.L(a, b))
        self.partial = tuple(sums)
        self.label = "summed action"

    def _check(self, k):
        if k < 0 or k > len(self.history):
            raise ContractError("summed action is defined for 0 <= k <= %d" % len(self.history))

    def S(self, k, q):
        self._check(k)
        if k == 0:
            return 0.0
        return self.partial[k - 1] + self.sys.L(self.history[k - 1], q)

    def DS(self, k, q):
        self._check(k)
        q = as_vector(q)
        if k == 0:
            return np.zeros_like(q)
        return self.sys.D2L(self.history[k - 1], q)

    def extended(self, c):
        return SummedAction(self.sys, self.history + (as_vector(c),))


class ActionToGo(ActionFamily):
    """Negative action remaining along a known future ``c_start, ..., c_end``.

    ``S^k(q) = -L_d(q, c_{k+1}) - sum_{i>k} L_d(c_i, c_{i+1})`` for
    ``start <= k < end`` and ``S^end = 0``, so ``DS^k(q) = -D1 L_d(q, c_{k+1})``.
    This family solves the forced left Hamilton-Jacobi equation on pairs that
    end on the stored future.
    """

    def __init__(self, sys, future, start=0):
        self.sys = sys
        self.future = tuple(as_vector(c) for c in future)
        self.start = start
        self.end = start + len(self.future) - 1
        tails = [0.0]
        for a, b in zip(self.future[-2::-1], self.future[:0:-1]):
            tails.append(tails[-1] + sys.L(a, b))
        self.tail = tuple(reversed(tails))
        self.label = "action to go"

    def _check(self, k):
        if k < self.start or k > self.end:
            raise ContractError("action to go is defined for %d <= k <= %d" % (self.start, self.end))

    def _c(self, k):
        return self.future[k - self.start]

    def S(self, k, q):
        self._check(k)
        if k == self.end:
            return 0.0
        return -self.sys.L(q, self._c(k + 1)) - self.tail[k + 1 - self.start]

    def DS(self, k, q):
        self._check(k)
        q = as_vector(q)
        if k == self.end:
            return np.zeros_like(q)
        return -self.sys.D1L(q, self._c(k + 1))

    def prepended(self, c):
        return ActionToGo(self.sys, (as_vector(c),) + self.future, self.start - 1)


class PerturbedAction(ActionFamily):
    """``S^k(q) + eps |q|^2``, for fault injection and slope tests.

    Extension along a generated sequence is delegated to the base family.
    """

    def __init__(self, base, eps):
        self.base = base
        self.eps = eps
        self.label = "%s + %g|q|^2" % (base.label, eps)

    def S(self, k, q):
        q = as_vector(q)
        return self.base.S(k, q) + self.eps * float(q @ q)

    def DS(self, k, q):
        q = as_vector(q)
        return self.base.DS(k, q) + 2.0 * self.eps * q

    def __getattr__(self, name):
        if name in ("history", "start", "future"):
            return getattr(self.base, name)
        raise AttributeError(name)

    def extended(self, c):
        return PerturbedAction(self.base.extended(c), self.eps)

    def prepended(self, c):
        return PerturbedAction(self.base.prepended(c), self.eps)


def perturbed(S, eps):
    return PerturbedAction(S, eps)


@dataclass(frozen=True)
class GammaMaps:
    """``gamma_minus`` and ``gamma_plus`` of an action family at index ``k``.

    ``gamma_minus`` uses ``DS^k`` on the first leg and ``gamma_plus`` uses
    ``DS^{k+1}`` on the second.
    """

    sys: object
    S: ActionFamily
    k: int

    def gamma_plus(self, q0, q1):
        return self.S.DS(self.k + 1, q1) + self.sys.f_plus(q0, q1)

    def gamma_minus(self, q0, q1):
        return self.S.DS(self.k, q0) - self.sys.f_minus(q0, q1)

    def gamma(self, q0, q1):
        return self.gamma_minus(q0, q1), self.gamma_plus(q0, q1)

    def shifted(self, dk):
        return GammaMaps(self.sys, self.S, self.k + dk)


def build_gamma(sys, S, k):
    return GammaMaps(sys, S, k)


@dataclass(frozen=True)
class RayleighGenerator:
    """``G_d(q0, q1) = S^k(q0) + S^{k+1}(q1) - R_d(q0, q1)``.

    On Rayleigh systems ``D1 G_d = gamma_minus`` and ``D2 G_d = gamma_plus``.
    """

    sys: object
    S: ActionFamily
    k: int

    def __post_init__(self):
        if not self.sys.is_rayleigh:
            raise ContractError("G_d needs a discrete Rayleigh potential")

    def __call__(self, q0, q1):
        return self.S.S(self.k, q0) + self.S.S(self.k + 1, q1) - self.sys.R(q0, q1)

    def d1(self, q0, q1):
        return self.S.DS(self.k, q0) - self.sys.D1R(q0, q1)

    def d2(self, q0, q1):
        return self.S.DS(self.k + 1, q1) - self.sys.D2R(q0, q1)


def rayleigh_generator(sys, S, k):
    return RayleighGenerator(sys, S, k)


def hj_residual(sys, S, side, pair, k=0, cfg=DEFAULT_SOLVER, form="direct"):
    """Forced right (``'right'``) or left (``'left'``) discrete HJ residual at a pair.

    ``form='generator'`` takes the momentum from ``D G_d`` instead of the
    gamma maps (Rayleigh systems only).
    """
    q0, q1 = as_vector(pair[0]), as_vector(pair[1])
    jump = S.S(k + 1, q1) - S.S(k, q0)
    if form == "generator":
        G = RayleighGenerator(sys, S, k)
        gp, gm = G.d2(q0, q1), G.d1(q0, q1)
    else:
        g = GammaMaps(sys, S, k)
        gp, gm = g.gamma_plus(q0, q1), g.gamma_minus(q0, q1)
    if side == "right":
        return float(jump - gp @ q1 + discrete_hamiltonian(sys, "plus", q0, gp, cfg))
    if side == "left":
        return float(jump + gm @ q0 + discrete_hamiltonian(sys, "minus", q1, gm, cfg))
    raise ValueError("side must be 'right' or 'left'")


def hj_flow(sys, gamma, variant, pair, cfg=DEFAULT_SOLVER):
    """Configuration flow projected through the gamma maps.

    ``pair = (q_{j-1}, q_j)`` and ``gamma.k = j - 1``.

    * ``via_gamma_plus``: ``q_{j+1} = pi_Q F_d^H(q_j, gamma_plus(q_{j-1}, q_j))``.
    * ``via_gamma_minus``: ``pi_Q F_d^H(q_{j-1}, gamma_minus(q_{j-1}, q_j))``, which
      returns ``q_j`` when the family is consistent.
    * ``implicit_minus``: the root ``x`` of
      ``q_j + D2H-(x, gm(q_j, x)) - [D_{q_j} gm]^{-T} f_minus(q_j, x) = 0`` with
      ``gm`` the ``gamma_minus`` of index ``j``, solved by Newton from the
      ``via_gamma_plus`` prediction when that is available.
    """
    q_prev, q = as_vector(pair[0]), as_vector(pair[1])
    if variant == "via_gamma_plus":
        return hamiltonian_flow(sys, (q, gamma.gamma_plus(q_prev, q)), cfg).q
    if variant == "via_gamma_minus":
        return hamiltonian_flow(sys, (q_prev, gamma.gamma_minus(q_prev, q)), cfg).q
    if variant == "implicit_minus":
        nxt = gamma.shifted(1)

        def F(x):
            p = nxt.gamma_minus(q, x)
            M = jacobian(lambda y: nxt.gamma_minus(y, x), q)
            d2 = hamiltonian_gradients(sys, "minus", x, p, cfg).d2
            return q + d2 - np.linalg.solve(M.T, sys.f_minus(q, x))

        try:
            guess = hj_flow(sys, gamma, "via_gamma_plus", pair, cfg)
        except (ContractError, ConvergenceError, RegularityError):
            guess = 2.0 * q - q_prev
        return newton(F, guess, _loosened(cfg), "implicit HJ flow")
    raise ValueError("unknown variant %r" % variant)


def _loosened(cfg):
    # the implicit equation nests a Newton solve, so its residual floor sits
    # a little above the inner tolerance
    return type(cfg)(tol=max(cfg.tol, 1e-11), max_iter=cfg.max_iter, cond_limit=cfg.cond_limit)


def backward_flow(sys, gamma, pair, cfg=DEFAULT_SOLVER):
    """``(q_j, q_{j+1}) -> q_{j-1}`` through ``(F^{f+})^{-1}`` of ``gamma_minus``.

    ``gamma.k`` is the index ``j`` of the first leg.
    """
    q, q_next = as_vector(pair[0]), as_vector(pair[1])
    return legendre_plus_inverse(sys, q, gamma.gamma_minus(q, q_next), cfg)


@dataclass
class HJRow:
    k: int
    q: np.ndarray
    p: np.ndarray
    hj_residual: float
    hamilton_residual: float


@dataclass
class HJReport:
    """Sequence generated through an action family and its residuals."""

    variant: str
    rows: List[HJRow] = field(default_factory=list)
    max_del_gap: float = 0.0
    max_hamilton_other: float = 0.0

    @property
    def max_hj(self):
        return max((abs(r.hj_residual) for r in self.rows), default=0.0)

    @property
    def max_hamilton(self):
        return max((r.hamilton_residual for r in self.rows), default=0.0)

    def first_failure(self, column, tol):
        for r in self.rows:
            if abs(getattr(r, column)) > tol:
                return r.k
        return None

    def passed(self, tol):
        return max(self.max_hj, self.max_hamilton, self.max_del_gap) <= tol

    def to_csv(self, path):
        n = self.rows[0].q.size if self.rows else 0
        header = (["k"] + ["q[%d]" % i for i in range(n)] + ["p[%d]" % i for i in range(n)]
                  + ["hj_residual", "hamilton_residual"])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in self.rows:
                w.writerow([r.k] + ["%.17g" % x for x in np.concatenate([r.q, r.p])]
                           + ["%.17g" % r.hj_residual, "%.17g" % r.hamilton_residual])


def _can(fam, method):
    if isinstance(fam, PerturbedAction):
        return _can(fam.base, method)
    return callable(getattr(fam, method, None))


def _restart(fam, sys, c_end, N):
    if isinstance(fam, PerturbedAction):
        return PerturbedAction(_restart(fam.base, sys, c_end, N), fam.eps)
    return ActionToGo(sys, (c_end,), N)


def _ham_norm(res):
    return float(max(np.max(np.abs(res[0])), np.max(np.abs(res[1]))))


def hj_verify(sys, S, seed, N, cfg=DEFAULT_SOLVER, variant="via_gamma_plus"):
    """Generate ``c_0..c_N`` through an action family and check it.

    * ``via_gamma_plus`` runs forward from ``seed = (c_0, c_1)``. ``S`` is either a
      fixed family or a :class:`SummedAction`, which is extended along the
      generated points. Momenta are ``p_k = gamma_plus(c_{k-1}, c_k)`` and
      ``p_0`` is the left momentum of the first pair; the right HJ residual
      and the left Hamilton equations are reported.
    * ``implicit_minus`` runs forward with the implicit flow of a fixed family
      and ``p_k = gamma_minus(c_k, c_{k+1})``; the left HJ residual and left
      Hamilton equations are reported.
    * ``backward`` runs from ``seed = (c_{N-1}, c_N)`` towards ``c_0``. ``S`` is
      either fixed or an :class:`ActionToGo`, prepended as points are
      generated. Momenta are ``p_k = gamma_minus(c_k, c_{k+1})``; the left HJ
      residual and the right Hamilton equations are reported.

    The report also carries the other-side Hamilton residual and the gap to
    a discrete Euler-Lagrange trajectory from the same seed.
    """
    c = [as_vector(seed[0]), as_vector(seed[1])]
    if N < 1:
        raise ContractError("need N >= 1")
    report = HJReport(variant)
    try:
        if variant in ("via_gamma_plus", "implicit_minus"):
            fam = S
            grows = _can(fam, "extended")
            if grows and len(fam.history) == 0:
                fam = fam.extended(c[0])
            for j in range(1, N):
                if grows and len(fam.history) <= j:
                    fam = fam.extended(c[j])
                c.append(hj_flow(sys, GammaMaps(sys, fam, j - 1), variant, (c[j - 1], c[j]), cfg))
            if grows:
                while len(fam.history) < N:
                    fam = fam.extended(c[len(fam.history)])
            if variant == "via_gamma_plus":
                side, ham_side, other = "right", "minus", "plus"
                p = [momentum_minus(sys, c[0], c[1])]
                p += [GammaMaps(sys, fam, k - 1).gamma_plus(c[k - 1], c[k]) for k in range(1, N + 1)]
            else:
                side, ham_side, other = "left", "minus", "plus"
                p = [GammaMaps(sys, fam, k).gamma_minus(c[k], c[k + 1]) for k in range(N)]
                p.append(momentum_plus(sys, c[N - 1], c[N]))
        elif variant == "backward":
            c = [None] * (N + 1)
            c[N - 1], c[N] = as_vector(seed[0]), as_vector(seed[1])
            fam = S
            grows = _can(fam, "prepended")
            if grows and len(fam.future) == 0:
                fam = _restart(fam, sys, c[N], N)
            for j in range(N - 1, 0, -1):
                if grows:
                    while fam.start > j:
                        fam = fam.prepended(c[fam.start - 1])
                c[j - 1] = backward_flow(sys, GammaMaps(sys, fam, j), (c[j], c[j + 1]), cfg)
            if grows:
                while fam.start > 0:
                    fam = fam.prepended(c[fam.start - 1])
            side, ham_side, other = "left", "plus", "minus"
            p = [GammaMaps(sys, fam, k).gamma_minus(c[k], c[k + 1]) for k in range(N)]
            p.append(momentum_plus(sys, c[N - 1], c[N]))
        else:
            raise ValueError("unknown variant %r" % variant)
    except (ConvergenceError, RegularityError, NumericDomainError) as exc:
        raise DivergenceError("HJ sequence generation failed: %s" % exc) from exc

    for k in range(N + 1):
        if k < N:
            hj = hj_residual(sys, fam, side, (c[k], c[k + 1]), k, cfg)
            ham = _ham_norm(hamilton_eq_residuals(sys, ham_side, c[k], p[k], c[k + 1], p[k + 1], cfg))
            oth = _ham_norm(hamilton_eq_residuals(sys, other, c[k], p[k], c[k + 1], p[k + 1], cfg))
            report.max_hamilton_other = max(report.max_hamilton_other, oth)
        else:
            hj = ham = 0.0
        report.rows.append(HJRow(k, c[k], p[k], hj, ham))

    if variant == "backward":
        ref = [c[N], c[N - 1]]
        for j in range(N - 1, 0, -1):
            ref.append(del_step_backward(sys, ref[-1], ref[-2], cfg))
        ref = ref[::-1]
    else:
        ref = [c[0], c[1]]
        for j in range(1, N):
            ref.append(del_step(sys, ref[-2], ref[-1], cfg))
    report.max_del_gap = float(max(np.max(np.abs(a - b)) for a, b in zip(c, ref)))
    return report


@dataclass(frozen=True)
class OscillatorClosedForms:
    """Hand-derived maps for the midpoint discretization of ``m q'' + r q' + k q = 0``.

    ``L_d = (h/2) m ((q1-q0)/h)^2 - (h/2) k ((q0+q1)/2)^2`` and
    ``R_d = r ((q1-q0)/2)^2``.
    """

    m: float
    k: float
    r: float
    h: float

    @property
    def _den(self):
        return self.h ** 2 * self.k + 2 * self.h * self.r + 4 * self.m

    def momentum_plus(self, q0, q1):
        m, k, r, h = self.m, self.k, self.r, self.h
        return m / h * (q1 - q0) - k * h * (q0 + q1) / 4 - r * (q1 - q0) / 2

    def momentum_minus(self, q0, q1):
        m, k, r, h = self.m, self.k, self.r, self.h
        return m / h * (q1 - q0) + k * h * (q0 + q1) / 4 + r * (q1 - q0) / 2

    def hamiltonian_flow(self, q, p):
        m, k, r, h = self.m, self.k, self.r, self.h
        q1 = (-h ** 2 * k * q + 4 * h * p + 2 * h * q * r + 4 * m * q) / self._den
        p1 = -(h ** 2 * k * p + 4 * h * k * m * q + 2 * h * p * r - 4 * m * p) / self._den
        return q1, p1

    def flow_minus(self, q_prev, q):
        m, k, r, h = self.m, self.k, self.r, self.h
        return (-h ** 2 * k * (q_prev + 2 * q) + 2 * h * q_prev * r
                - 4 * m * (q_prev - 2 * q)) / self._den

    def gamma_plus(self, q0, q1):
        return self.momentum_plus(q0, q1)

    def left_hamiltonian(self, q1, p0, q0):
        m, k, h = self.m, self.k, self.h
        return -p0 * q0 - h / 2 * m * ((q1 - q0) / h) ** 2 + h / 2 * k * ((q0 + q1) / 2) ** 2
