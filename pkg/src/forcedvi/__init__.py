"""Variational integrators for mechanical systems with Rayleigh forces."""

__version__ = "0.1.0"

from .continuous import (CotangentState, ForcedHamiltonianSystem, ForcedLagrangianSystem,
                         TangentState, Trajectory, energy, forced_el_rhs, forced_hamilton_rhs,
                         legendre, legendre_inverse, rayleigh_force, reference_integrate)
from .discrete import (DiscreteForcedSystem, DiscreteTrajectory, Seed, SolverConfig,
                       check_rayleigh_condition, del_residual, del_residual_modified, del_step,
                       discrete_hamiltonian, gauge_transform, hamilton_eq_residuals,
                       hamiltonian_flow, lagrangian_flow, legendre_minus,
                       legendre_minus_inverse, legendre_plus, rayleigh_expand, run_trajectory)
from .discretizers import (exact_damped_oscillator, exact_discrete_numeric,
                           midpoint_discretize, rayleigh_conjecture_probe)
from .errors import (ContractError, ConvergenceError, DivergenceError, ForcedVIError,
                     NumericDomainError, OracleFailure, RegularityError)
from .hamilton_jacobi import (ActionFamily, ActionToGo, GammaMaps, SummedAction,
                              backward_flow, build_gamma, hj_flow, hj_residual, hj_verify)
from .symmetry import (SymmetryGenerator, conserved_drift, momentum_map, noether_residual,
                       subalgebra_check)
