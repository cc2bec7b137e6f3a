"""Turning continuous forced systems into discrete ones.

Includes the midpoint rule, the closed-form exact discretization of the
damped harmonic oscillator, a numeric exact-discretization oracle
(shooting plus quadrature) and a probe of the Rayleigh condition for exact
discrete forces.
"""

import csv
from dataclasses import dataclass, field
from typing import List, NamedTuple

import numpy as np
from scipy.integrate import simpson, solve_ivp

from .continuous import first_order_rhs
from .derivatives import as_vector, gradient
from .discrete import DiscreteForcedSystem, sample_pairs
from .errors import ContractError, ForcedVIError, OracleFailure


def _is_velocity_only(R, n, samples=20, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        q, v = rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)
        dq = gradient(lambda x: R(x, v), q)
        if np.max(np.abs(dq)) > 1e-8 * (1.0 + abs(R(q, v))):
            return False
    return True


def midpoint_discretize(sys, h):
    """Midpoint rule: ``L_d = h L(mid, dq/h)`` and ``f_d^pm = (h/2) f_L(mid, dq/h)``.

    If the continuous Rayleigh potential depends on velocity only, the
    discrete potential ``R_d = (h^2/2) R((q1 - q0)/h)`` is attached; its
    partial gradients reproduce the midpoint forces.
    """
    if not h > 0:
        raise ContractError("step h must be positive")

    def args(q0, q1):
        q0, q1 = as_vector(q0), as_vector(q1)
        return 0.5 * (q0 + q1), (q1 - q0) / h

    def lagrangian(q0, q1):
        return h * sys.L(*args(q0, q1))

    def d1L(q0, q1):
        m, v = args(q0, q1)
        return 0.5 * h * sys.grad_q(m, v) - sys.grad_v(m, v)

    def d2L(q0, q1):
        m, v = args(q0, q1)
        return 0.5 * h * sys.grad_q(m, v) + sys.grad_v(m, v)

    def force(q0, q1):
        return 0.5 * h * sys.f(*args(q0, q1))

    rayleigh = d1R = d2R = None
    if sys.rayleigh is not None and _is_velocity_only(sys.rayleigh, sys.n):
        def rayleigh(q0, q1):
            return 0.5 * h * h * sys.R(*args(q0, q1))

        def d1R(q0, q1):
            return -0.5 * h * sys.rayleigh_grad_v(*args(q0, q1))

        def d2R(q0, q1):
            return 0.5 * h * sys.rayleigh_grad_v(*args(q0, q1))

    return DiscreteForcedSystem(
        n=sys.n, h=h, lagrangian=lagrangian, force_plus=force, force_minus=force,
        rayleigh=rayleigh, d1L=d1L, d2L=d2L, d1R=d1R, d2R=d2R, mass=sys.mass,
        name="midpoint " + sys.name if sys.name else "midpoint",
    )


@dataclass(frozen=True)
class OscillatorParameters:
    """``m q'' + r q' + k q = 0`` in the underdamped regime."""

    m: float
    k: float
    r: float

    def __post_init__(self):
        if not (self.m > 0 and self.k > 0 and self.r >= 0):
            raise ContractError("need m > 0, k > 0, r >= 0")
        if 4 * self.k * self.m <= self.r ** 2:
            raise ContractError("oscillator must be underdamped (4km > r^2)")

    @property
    def a(self):
        return self.r / (2 * self.m)

    @property
    def b(self):
        return np.sqrt(4 * self.k * self.m - self.r ** 2) / (2 * self.m)


def damped_oscillator_solution(m, k, r, q0, v0):
    """Closed-form solution ``t -> (q(t), q'(t))`` of the damped oscillator."""
    par = OscillatorParameters(m, k, r)
    a, b = par.a, par.b
    c = (v0 + a * q0) / b

    def solution(t):
        t = np.asarray(t, dtype=float)
        e, cs, sn = np.exp(-a * t), np.cos(b * t), np.sin(b * t)
        q = e * (q0 * cs + c * sn)
        v = -a * q + e * b * (c * cs - q0 * sn)
        return q, v

    return solution


def exact_damped_oscillator(m, k, r, h):
    """Exact discrete Lagrangian, forces and Rayleigh potential of the damped oscillator.

    With ``a = r/2m``, ``b = sqrt(4km - r^2)/2m`` and ``s = sin(bh)``:
    ``L_d = (m b / 2s) [cos(bh)(q0^2 + q1^2) - 2 cosh(ah) q0 q1]``,
    ``f+ = (m b sinh(ah)/s) q0 - r q1/2``, ``f- = r q0/2 - (m b sinh(ah)/s) q1`` and
    ``R_d = r (q0^2 + q1^2)/4 - (m b sinh(ah)/s) q0 q1``.
    All are regular at ``r = 0``, where the forces vanish.
    """
    par = OscillatorParameters(m, k, r)
    if not h > 0:
        raise ContractError("step h must be positive")
    a, b = par.a, par.b
    s = np.sin(b * h)
    if abs(s) < 1e-12:
        raise ContractError("b h is a multiple of pi; the boundary value problem is singular")
    cb, ch = np.cos(b * h), np.cosh(a * h)
    alpha = m * b / s
    sigma = m * b * np.sinh(a * h) / s

    def lagrangian(q0, q1):
        return float(0.5 * alpha * (cb * (q0 @ q0 + q1 @ q1) - 2 * ch * (q0 @ q1)))

    def rayleigh(q0, q1):
        return float(0.25 * r * (q0 @ q0 + q1 @ q1) - sigma * (q0 @ q1))

    return DiscreteForcedSystem(
        n=1, h=h, lagrangian=lagrangian,
        force_plus=lambda q0, q1: sigma * q0 - 0.5 * r * q1,
        force_minus=lambda q0, q1: 0.5 * r * q0 - sigma * q1,
        rayleigh=rayleigh,
        d1L=lambda q0, q1: alpha * (cb * q0 - ch * q1),
        d2L=lambda q0, q1: alpha * (cb * q1 - ch * q0),
        d1R=lambda q0, q1: 0.5 * r * q0 - sigma * q1,
        d2R=lambda q0, q1: 0.5 * r * q1 - sigma * q0,
        mass=np.array([[m]]),
        name="exact damped oscillator",
    )


class ExactDiscrete(NamedTuple):
    lagrangian: float
    force_plus: np.ndarray
    force_minus: np.ndarray


_RTOL, _ATOL = 1e-13, 1e-14


def _integrate(rhs, q0, v0, h):
    y0 = np.concatenate([q0, v0])
    sol = solve_ivp(rhs, (0.0, h), y0, method="DOP853", rtol=_RTOL, atol=_ATOL,
                    dense_output=True)
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        raise OracleFailure("inner integration failed: %s" % sol.message)
    return sol


def _shoot(rhs, q0, q1, h, tol=1e-12, max_iter=30):
    n = q0.size
    v = (q1 - q0) / h
    for _ in range(max_iter + 1):
        sol = _integrate(rhs, q0, v, h)
        r = sol.y[:n, -1] - q1
        if np.max(np.abs(r)) <= tol * (1.0 + np.max(np.abs(q1))):
            return sol
        J = np.empty((n, n))
        for j in range(n):
            dv = 1e-6 * (1.0 + abs(v[j]))
            vp, vm = v.copy(), v.copy()
            vp[j] += dv
            vm[j] -= dv
            J[:, j] = (_integrate(rhs, q0, vp, h).y[:n, -1]
                       - _integrate(rhs, q0, vm, h).y[:n, -1]) / (2 * dv)
        try:
            v = v - np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise OracleFailure("singular shooting Jacobian") from exc
    raise OracleFailure("shooting did not converge")


def exact_discrete_numeric(sys, q0, q1, h, panels=64, delta=1e-3, quad_tol=1e-10):
    """Numeric exact discrete Lagrangian and forces.

    Solves the boundary value problem ``q(0) = q0``, ``q(h) = q1`` by
    shooting on the initial velocity, integrates ``L`` and ``f_L . dq/dq_i``
    along the solution with composite Simpson refined by Richardson
    extrapolation, and obtains the sensitivities ``dq(t)/dq_i`` by central
    differences (step ``delta``) of re-solved boundary value problems.
    """
    q0, q1 = as_vector(q0), as_vector(q1)
    n = q0.size
    rhs = first_order_rhs(sys)
    try:
        base = _shoot(rhs, q0, q1, h)
        legs = []
        for which in (0, 1):
            plus, minus = [], []
            for j in range(n):
                e = np.zeros(n)
                e[j] = delta
                if which == 0:
                    plus.append(_shoot(rhs, q0 + e, q1, h))
                    minus.append(_shoot(rhs, q0 - e, q1, h))
                else:
                    plus.append(_shoot(rhs, q0, q1 + e, h))
                    minus.append(_shoot(rhs, q0, q1 - e, h))
            legs.append((plus, minus))
    except ForcedVIError as exc:
        raise OracleFailure("exact discretization failed at (%s, %s): %s" % (q0, q1, exc)) from exc

    def integrands(m):
        t = np.linspace(0.0, h, m + 1)
        y = base.sol(t)
        qs, vs = y[:n].T, y[n:].T
        lag = np.array([sys.L(q, v) for q, v in zip(qs, vs)])
        force = np.array([sys.f(q, v) for q, v in zip(qs, vs)])
        out = [lag]
        for plus, minus in legs:
            sens = np.stack([(p.sol(t)[:n] - mm.sol(t)[:n]).T / (2 * delta)
                             for p, mm in zip(plus, minus)], axis=2)
            out.append(np.einsum("ti,tij->tj", force, sens))
        return out

    def quad(m):
        return [simpson(vals, dx=h / m, axis=0) for vals in integrands(m)]

    def richardson(m):
        coarse, fine = quad(m), quad(2 * m)
        return [f + (f - c) / 15.0 for c, f in zip(coarse, fine)]

    m = panels
    prev = richardson(m)
    for _ in range(6):
        m *= 2
        cur = richardson(m)
        change = max(np.max(np.abs(np.asarray(c) - np.asarray(p))) for c, p in zip(cur, prev))
        prev = cur
        if change < quad_tol:
            break
    lag, f_minus, f_plus = prev
    return ExactDiscrete(float(lag), np.atleast_1d(f_plus), np.atleast_1d(f_minus))


@dataclass
class ProbeRow:
    q0: np.ndarray
    q1: np.ndarray
    residual: float
    status: str


@dataclass
class ProbeReport:
    """Per-sample Rayleigh-condition defects of the exact discrete forces."""

    h: float
    rows: List[ProbeRow] = field(default_factory=list)

    @property
    def max_residual(self):
        vals = [r.residual for r in self.rows if r.status == "ok"]
        return max(vals) if vals else float("nan")

    def to_csv(self, path):
        n = self.rows[0].q0.size if self.rows else 0
        header = (["q0[%d]" % i for i in range(n)] + ["q1[%d]" % i for i in range(n)]
                  + ["residual", "status"])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in self.rows:
                w.writerow(["%.17g" % x for x in np.concatenate([row.q0, row.q1])]
                           + ["%.17g" % row.residual, row.status])


def rayleigh_conjecture_probe(sys, region=(-1.0, 1.0), samples=5, h=0.05, seed=0,
                              step=1e-2, delta=1e-3):
    """Measure the Rayleigh-condition defect of numeric exact discrete forces.

    This produces numerical evidence only. Oracle failures are recorded per
    sample and never raised.
    """
    if not sys.natural or sys.rayleigh is None:
        raise ContractError("the probe needs a natural system with a Rayleigh potential")
    n = sys.n
    report = ProbeReport(h=h)
    for q0, q1 in sample_pairs(n, region, samples, seed):
        def omega(z):
            ex = exact_discrete_numeric(sys, z[:n], z[n:], h, delta=delta)
            return np.concatenate([ex.force_minus, -ex.force_plus])

        z = np.concatenate([q0, q1])
        try:
            cols = []
            for j in range(2 * n):
                e = np.zeros(2 * n)
                e[j] = step
                cols.append((omega(z + e) - omega(z - e)) / (2 * step))
            Jw = np.column_stack(cols)
            report.rows.append(ProbeRow(q0, q1, float(np.max(np.abs(Jw - Jw.T))), "ok"))
        except OracleFailure as exc:
            report.rows.append(ProbeRow(q0, q1, float("nan"), "oracle-failure: %s" % exc))
    return report
