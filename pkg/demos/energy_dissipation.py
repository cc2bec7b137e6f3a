"""Weakly damped double well: energy of the midpoint rule and RK4 against a benchmark.

With a small Rayleigh force the variational integrator follows the slow
energy decay, while RK4 at the same step adds its own drift on top.

    python demos/energy_dissipation.py [N]
"""

import sys

from forcedvi.scenarios import RunConfig, run_scenario

N = int(sys.argv[1]) if len(sys.argv) > 1 else 5000
report = run_scenario(RunConfig("marsden-west", methods=["midpoint", "rk4", "benchmark"], h=0.1, N=N))
cols = report.columns
E = {m: report.rows[:, cols.index("%s.energy" % m)] for m in ("midpoint", "rk4", "benchmark")}
print("initial energy %.6f (target 11/40 = %.6f)" % (E["benchmark"][0], 11 / 40))
print("%8s %12s %12s %12s" % ("t", "benchmark", "midpoint", "rk4"))
for i in range(0, N + 1, max(1, N // 10)):
    print("%8.1f %12.8f %12.8f %12.8f" % (report.rows[i, 0], E["benchmark"][i], E["midpoint"][i], E["rk4"][i]))
for m in ("midpoint", "rk4"):
    print("%-9s max |E - E_benchmark| = %.3e" % (m, report.summary["methods"][m]["energy_error"]))
report.write_csv("energy-dissipation.csv")
print("wrote energy-dissipation.csv")
