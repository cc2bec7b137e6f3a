import numpy as np
import pytest
from hypothesis import given, strategies as st

from forcedvi.continuous import (ForcedHamiltonianSystem, ForcedLagrangianSystem, el_rhs, energy,
                                 forced_el_rhs, forced_hamilton_rhs, legendre, legendre_inverse,
                                 rayleigh_force, reference_integrate)
from forcedvi.discretizers import damped_oscillator_solution
from forcedvi.errors import DivergenceError, NumericDomainError, RegularityError
from forcedvi.systems import (damped_oscillator, free_particle, marsden_west,
                              marsden_west_initial_state, polar_double_well)

small = st.floats(-2.0, 2.0, allow_nan=False)


class TestRayleighForce:
    def test_quadratic_potential(self):
        R = lambda q, v: 0.05 * v @ v
        assert rayleigh_force(R, ([0.0], [1.0]))[0] == pytest.approx(-0.1, abs=1e-9)

    def test_zero_potential(self):
        assert np.all(rayleigh_force(lambda q, v: 0.0, ([1.0, 2.0], [3.0, 4.0])) == 0.0)

    def test_double_well_damping(self):
        k = 1e-3
        f = rayleigh_force(lambda q, v: 0.5 * k * v @ v, ([0.0, 1.0], [0.5, 0.0]),
                           grad_v=lambda q, v: k * v)
        assert np.allclose(f, [-5e-4, 0.0], atol=1e-15)

    def test_non_finite_gradient(self):
        with pytest.raises(NumericDomainError):
            rayleigh_force(lambda q, v: np.nan, ([0.0], [1.0]))

    @given(small, small)
    def test_matches_system_force(self, q, v):
        for sys in (damped_oscillator(1.0, 1.0, 0.3), marsden_west(1e-3)):
            qv, vv = np.full(sys.n, q), np.full(sys.n, v)
            assert np.allclose(rayleigh_force(sys.rayleigh, (qv, vv)), sys.f(qv, vv), atol=1e-8)


class TestEnergy:
    def test_oscillator(self):
        assert energy(damped_oscillator(1, 1, 0), ([1.0], [0.0])) == pytest.approx(0.5)

    def test_free_particle_at_rest(self):
        assert energy(free_particle(), ([3.0], [0.0])) == 0.0

    def test_double_well_initial_energy(self):
        q0, v0 = marsden_west_initial_state()
        assert energy(marsden_west(), (q0, v0)) == pytest.approx(11 / 40, abs=1e-14)


class TestLegendre:
    def test_mass_times_velocity(self):
        assert legendre(free_particle(m=2.0), ([0.0], [3.0])).p[0] == 6.0

    def test_rest(self):
        assert legendre(marsden_west(), ([0.3, 0.4], [0.0, 0.0])).p.tolist() == [0.0, 0.0]

    def test_oscillator(self):
        s = legendre(damped_oscillator(1, 1, 0), ([1.0], [1.0]))
        assert s.q[0] == 1.0 and s.p[0] == 1.0

    def test_inverse_without_mass_matrix(self):
        sys = polar_double_well()
        q, v = np.array([1.3, 0.2]), np.array([0.4, -0.7])
        p = legendre(sys, (q, v)).p
        assert np.allclose(legendre_inverse(sys, q, p), v, atol=1e-12)


class TestForcedEL:
    def test_damped_oscillator_at_rest(self):
        assert forced_el_rhs(damped_oscillator(1, 1, 0.1), ([1.0], [0.0]))[0] == pytest.approx(-1.0)

    def test_free_particle(self):
        assert forced_el_rhs(free_particle(), ([1.0], [2.0]))[0] == 0.0

    def test_damped_oscillator_moving(self):
        assert forced_el_rhs(damped_oscillator(1, 1, 0.1), ([0.0], [1.0]))[0] == pytest.approx(-0.1)

    def test_polar_centrifugal_terms(self):
        # r'' = r th'^2 - V'(r) - c r',  th'' = -2 r' th' / r
        c = 0.01
        sys = polar_double_well(c)
        q, v = np.array([1.2, 0.3]), np.array([0.1, 0.5])
        Vp = 2 * 1.2 * (1.44 - 1) * (3 * 1.44 - 1)
        expected = [1.2 * 0.25 - Vp - c * 0.1, -2 * 0.1 * 0.5 / 1.2]
        assert np.allclose(forced_el_rhs(sys, (q, v)), expected, atol=1e-12)

    def test_zero_force_uses_same_path(self):
        sys = marsden_west(0.0)
        rng = np.random.default_rng(1)
        for _ in range(20):
            q, v = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
            assert np.max(np.abs(forced_el_rhs(sys, (q, v)) - el_rhs(sys, (q, v)))) <= 1e-14

    def test_singular_velocity_hessian(self):
        sys = ForcedLagrangianSystem(n=1, lagrangian=lambda q, v: float(q @ v))
        with pytest.raises(RegularityError):
            forced_el_rhs(sys, ([1.0], [1.0]))


class TestForcedHamilton:
    H = staticmethod(lambda q, p: 0.5 * p @ p + 0.5 * q @ q)

    def test_oscillator(self):
        dq, dp = forced_hamilton_rhs(ForcedHamiltonianSystem(1, self.H), ([1.0], [0.0]))
        assert dq[0] == pytest.approx(0.0, abs=1e-12) and dp[0] == pytest.approx(-1.0)

    def test_constant_hamiltonian(self):
        dq, dp = forced_hamilton_rhs(ForcedHamiltonianSystem(1, lambda q, p: 2.0), ([1.0], [1.0]))
        assert dq[0] == 0.0 and dp[0] == 0.0

    def test_linear_drag(self):
        sys = ForcedHamiltonianSystem(1, self.H, beta=lambda q, p: 0.1 * p)
        dq, dp = forced_hamilton_rhs(sys, ([0.0], [1.0]))
        assert dq[0] == pytest.approx(1.0) and dp[0] == pytest.approx(-0.1)


class TestReferenceIntegrate:
    @pytest.mark.parametrize("method", ["euler", "rk4", "benchmark"])
    def test_free_particle(self, method):
        traj = reference_integrate(free_particle(), ([0.0], [1.0]), 0.1, 10, method)
        assert traj.q[-1, 0] == pytest.approx(1.0, abs=1e-12)
        assert traj.q.shape == (11, 1)

    def test_benchmark_against_closed_form(self):
        sol = damped_oscillator_solution(1, 1, 0.1, 1.0, 0.0)
        traj = reference_integrate(damped_oscillator(1, 1, 0.1), ([1.0], [0.0]), 0.1, 10, "benchmark")
        assert abs(traj.q[-1, 0] - sol(1.0)[0]) < 1e-9

    def test_euler_energy_grows(self):
        sys = damped_oscillator(1, 1, 0.0)
        E = reference_integrate(sys, ([1.0], [0.0]), 0.1, 200, "euler").energies(sys)
        assert np.all(np.diff(E) > 0)

    def test_benchmark_energy_non_increasing(self):
        sys = marsden_west(1e-2)
        E = reference_integrate(sys, marsden_west_initial_state(), 0.1, 300, "benchmark").energies(sys)
        assert np.all(np.diff(E) <= 1e-8)

    def test_blow_up_reports_step(self):
        sys = ForcedLagrangianSystem(n=1, lagrangian=lambda q, v: 0.5 * v @ v + 0.25 * (q @ q) ** 2,
                                     dL_dq=lambda q, v: q ** 3, mass=np.eye(1))
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(DivergenceError) as info:
                reference_integrate(sys, ([1.0], [1.0]), 0.5, 100, "rk4")
        assert 1 <= info.value.step <= 100

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            reference_integrate(free_particle(), ([0.0], [1.0]), 0.0, 10, "rk4")
        with pytest.raises(ValueError):
            reference_integrate(free_particle(), ([0.0], [1.0]), 0.1, 10, "leapfrog")
