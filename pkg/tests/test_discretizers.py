import os

import numpy as np
import pytest

from forcedvi.continuous import ForcedLagrangianSystem, reference_integrate
from forcedvi.derivatives import gradient
from forcedvi.discrete import del_residual, del_residual_modified, rayleigh_expand, run_trajectory
from forcedvi.discretizers import (OscillatorParameters, damped_oscillator_solution,
                                   exact_damped_oscillator, exact_discrete_numeric,
                                   midpoint_discretize, rayleigh_conjecture_probe)
from forcedvi.errors import ContractError, OracleFailure
from forcedvi.systems import (damped_oscillator, free_particle, marsden_west,
                              position_dependent_oscillator)


def undamped_exact_lagrangian(q0, q1, h):
    return ((q0 ** 2 + q1 ** 2) * np.cos(h) - 2 * q0 * q1) / (2 * np.sin(h))


class TestMidpoint:
    def test_lagrangian_value(self):
        sys = midpoint_discretize(damped_oscillator(1, 1, 0), 0.1)
        assert sys.L([0.0], [0.1]) == pytest.approx(0.049875, abs=1e-15)

    def test_force_value(self):
        sys = midpoint_discretize(damped_oscillator(1, 1, 0.1), 0.1)
        assert sys.f_plus([0.0], [0.1])[0] == pytest.approx(-0.005, abs=1e-15)
        assert sys.f_minus([0.0], [0.1])[0] == pytest.approx(-0.005, abs=1e-15)

    def test_vanishing_step(self):
        sys = midpoint_discretize(damped_oscillator(1, 1, 0.1), 1e-12)
        assert abs(sys.L([0.4], [0.4])) < 1e-12
        assert abs(sys.f_plus([0.4], [0.4])[0]) < 1e-12

    def test_bad_step(self):
        with pytest.raises(ContractError):
            midpoint_discretize(free_particle(), 0.0)

    def test_analytic_partials(self, rng):
        sys = midpoint_discretize(marsden_west(), 0.1)
        for _ in range(20):
            q0, q1 = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
            assert np.allclose(sys.D1L(q0, q1), gradient(lambda x: sys.L(x, q1), q0), atol=1e-9)
            assert np.allclose(sys.D2L(q0, q1), gradient(lambda x: sys.L(q0, x), q1), atol=1e-9)

    def test_potential_attached_for_velocity_only_damping(self):
        assert midpoint_discretize(damped_oscillator(1, 1, 0.1), 0.1).is_rayleigh
        assert midpoint_discretize(marsden_west(), 0.1).is_rayleigh
        assert not midpoint_discretize(position_dependent_oscillator(), 0.1).is_rayleigh

    def test_potential_not_attached_for_position_dependent_damping(self):
        cont = ForcedLagrangianSystem(n=1, lagrangian=lambda q, v: 0.5 * v @ v - 0.5 * q @ q,
                                      rayleigh=lambda q, v: 0.5 * float(q @ q) * float(v @ v),
                                      mass=np.eye(1))
        assert not midpoint_discretize(cont, 0.1).is_rayleigh

    def test_attached_potential_reproduces_forces(self, rng):
        sys = midpoint_discretize(marsden_west(0.05), 0.1)
        expanded = rayleigh_expand(sys, sys.rayleigh)
        for _ in range(30):
            q0, q1 = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
            assert np.max(np.abs(expanded.f_plus(q0, q1) - sys.f_plus(q0, q1))) <= 1e-12
            assert np.max(np.abs(expanded.f_minus(q0, q1) - sys.f_minus(q0, q1))) <= 1e-12
            q2 = rng.uniform(-2, 2, 2)
            assert np.max(np.abs(del_residual(sys, q0, q1, q2) - del_residual_modified(sys, q0, q1, q2))) <= 1e-12


class TestExactOscillator:
    def test_parameters(self):
        par = OscillatorParameters(1.0, 1.0, 0.1)
        assert par.a == pytest.approx(0.05) and par.b == pytest.approx(np.sqrt(3.99) / 2)

    @pytest.mark.parametrize("args", [(1, 1, 2.0, 0.1), (1, 1, 3.0, 0.1), (-1, 1, 0.1, 0.1),
                                      (1, 1, 0.0, np.pi), (1, 1, 0.1, 0.0)])
    def test_domain_errors(self, args):
        with pytest.raises(ContractError):
            exact_damped_oscillator(*args)

    def test_zero_damping_limit(self, rng):
        for r in (0.0, 1e-14):
            sys = exact_damped_oscillator(1, 1, r, 0.1)
            for q0, q1 in rng.uniform(-2, 2, (5, 2)):
                assert abs(sys.f_plus([q0], [q1])[0]) < 1e-12
                assert abs(sys.f_minus([q0], [q1])[0]) < 1e-12
                assert sys.L([q0], [q1]) == pytest.approx(undamped_exact_lagrangian(q0, q1, 0.1), abs=1e-12)

    def test_forces_match_numeric_oracle(self, exact_damped):
        ex = exact_discrete_numeric(damped_oscillator(1, 1, 0.1), [1.0], [1.0], 0.1)
        assert abs(ex.force_plus[0] - exact_damped.f_plus([1.0], [1.0])[0]) < 1e-8
        assert abs(ex.force_minus[0] - exact_damped.f_minus([1.0], [1.0])[0]) < 1e-8

    def test_potential_gradients_reproduce_forces(self, exact_damped, rng):
        R = exact_damped.rayleigh
        for q0, q1 in rng.uniform(-2, 2, (50, 2)):
            d1 = gradient(lambda x: R(x, np.array([q1])), [q0])
            d2 = gradient(lambda x: R(np.array([q0]), x), [q1])
            assert abs(d1[0] - exact_damped.f_minus([q0], [q1])[0]) < 1e-8
            assert abs(-d2[0] - exact_damped.f_plus([q0], [q1])[0]) < 1e-8

    def test_trajectory_interpolates_solution(self, exact_damped):
        sol = damped_oscillator_solution(1, 1, 0.1, 0.3, -0.8)
        q = sol(0.1 * np.arange(101))[0]
        traj = run_trajectory(exact_damped, ([q[0]], [q[1]]), 100)
        assert np.max(np.abs(traj.configs[:, 0] - q)) < 1e-10

    def test_closed_form_solution(self):
        sol = damped_oscillator_solution(2.0, 3.0, 0.4, 0.5, 0.2)
        traj = reference_integrate(damped_oscillator(2.0, 3.0, 0.4), ([0.5], [0.2]), 0.25, 8, "benchmark")
        q, v = sol(traj.t)
        assert np.max(np.abs(traj.q[:, 0] - q)) < 1e-9
        assert np.max(np.abs(traj.v[:, 0] - v)) < 1e-9


class TestNumericOracle:
    def test_free_particle(self):
        ex = exact_discrete_numeric(free_particle(), [0.0], [1.0], 1.0)
        assert ex.lagrangian == pytest.approx(0.5, abs=1e-10)
        assert abs(ex.force_plus[0]) == 0.0 and abs(ex.force_minus[0]) == 0.0

    def test_undamped_oscillator(self, rng):
        sys = damped_oscillator(1, 1, 0)
        for q0, q1 in rng.uniform(-2, 2, (3, 2)):
            ex = exact_discrete_numeric(sys, [q0], [q1], 0.1)
            assert abs(ex.lagrangian - undamped_exact_lagrangian(q0, q1, 0.1)) < 1e-8

    def test_consistency_with_closed_form(self, exact_damped, rng):
        sys = damped_oscillator(1, 1, 0.1)
        for q0, q1 in rng.uniform(-2, 2, (3, 2)):
            ex = exact_discrete_numeric(sys, [q0], [q1], 0.1)
            L = exact_damped.L([q0], [q1])
            assert abs(ex.lagrangian - L) <= 1e-7 * max(1.0, abs(L))
            assert abs(ex.force_plus[0] - exact_damped.f_plus([q0], [q1])[0]) < 1e-8
            assert abs(ex.force_minus[0] - exact_damped.f_minus([q0], [q1])[0]) < 1e-8

    def test_singular_boundary_problem(self):
        with pytest.raises(OracleFailure):
            exact_discrete_numeric(damped_oscillator(1, 1, 0), [0.0], [1.0], np.pi)


class TestProbe:
    def test_damped_oscillator(self):
        report = rayleigh_conjecture_probe(damped_oscillator(1, 1, 0.1), samples=3, h=0.1)
        assert report.max_residual < 1e-6

    def test_no_damping(self):
        report = rayleigh_conjecture_probe(damped_oscillator(1, 1, 0.0), samples=2, h=0.1)
        assert report.max_residual < 1e-9

    def test_requires_natural_rayleigh_system(self):
        with pytest.raises(ContractError):
            rayleigh_conjecture_probe(position_dependent_oscillator(), samples=1)
        cont = ForcedLagrangianSystem(n=1, lagrangian=lambda q, v: 0.5 * v @ v,
                                      rayleigh=lambda q, v: 0.5 * v @ v)
        with pytest.raises(ContractError):
            rayleigh_conjecture_probe(cont, samples=1)

    def test_oracle_failures_are_recorded(self, tmp_path):
        report = rayleigh_conjecture_probe(damped_oscillator(1, 1, 0.0), samples=1, h=np.pi)
        assert report.rows[0].status.startswith("oracle-failure")
        assert np.isnan(report.max_residual)
        path = os.path.join(tmp_path, "probe.csv")
        report.to_csv(path)
        lines = open(path).read().splitlines()
        assert lines[0] == "q0[0],q1[0],residual,status" and len(lines) == 2
