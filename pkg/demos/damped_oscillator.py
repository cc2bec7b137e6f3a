"""Damped oscillator: exact discretization, midpoint rule and the closed-form solution.

The exact discrete Lagrangian and forces reproduce the sampled flow to
roundoff, while the midpoint rule is second order.

    python demos/damped_oscillator.py
"""

import numpy as np

from forcedvi.discrete import Seed, run_trajectory
from forcedvi.discretizers import (damped_oscillator_solution, exact_damped_oscillator,
                                   midpoint_discretize)
from forcedvi.systems import damped_oscillator

m, k, r = 1.0, 1.0, 0.1
q0, v0 = 1.0, 0.0
sol = damped_oscillator_solution(m, k, r, q0, v0)
cont = damped_oscillator(m, k, r)

h, N = 0.1, 100
t = h * np.arange(N + 1)
q_true, _ = sol(t)
exact = run_trajectory(exact_damped_oscillator(m, k, r, h), ([q_true[0]], [q_true[1]]), N)
print("exact discretization, max |q_k - q(t_k)| = %.2e" % np.max(np.abs(exact.configs[:, 0] - q_true)))

print("\nmidpoint rule over t in [0, 1]")
prev = None
for h in (0.1, 0.05, 0.025, 0.0125):
    N = int(round(1 / h))
    tr = run_trajectory(midpoint_discretize(cont, h), Seed.velocity([q0], [v0], cont), N)
    err = abs(tr.configs[-1, 0] - sol(1.0)[0])
    ratio = "" if prev is None else "  ratio %.3f" % (prev / err)
    print("  h = %-7g terminal error %.3e%s" % (h, err, ratio))
    prev = err
