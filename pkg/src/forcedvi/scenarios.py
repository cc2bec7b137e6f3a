"""Scenario registry and experiment runners behind the command-line interface."""

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .continuous import energy, legendre_inverse, reference_integrate
from .discrete import Seed, SolverConfig, run_trajectory, seed_pair
from .discretizers import (damped_oscillator_solution, exact_damped_oscillator,
                           midpoint_discretize, rayleigh_conjecture_probe)
from .errors import ForcedVIError
from .hamilton_jacobi import SummedAction, hj_verify
from .symmetry import momentum_jump, momentum_map, noether_residual, translation
from .systems import (damped_oscillator, free_particle, marsden_west,
                      marsden_west_initial_state, polar_double_well)

SEED = 20240601
CONTINUOUS_METHODS = ("euler", "rk4", "benchmark")


class ConfigError(ForcedVIError):
    """Invalid scenario name, override or run configuration."""


class VerificationFailure(ForcedVIError):
    """A verification assertion did not hold."""


@dataclass
class Setup:
    """Everything needed to run one scenario with resolved parameters."""

    continuous: object
    q0: np.ndarray
    v0: np.ndarray
    h: float
    N: int
    generator: Optional[object] = None
    closed_form: Optional[Callable] = None
    exact_system: Optional[object] = None
    sample_box: tuple = ((-2.0, 2.0),)
    probe_h: Optional[float] = None


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: Dict[str, float]
    h: float
    N: int
    build: Callable
    methods: tuple = ("midpoint",)
    verifications: tuple = ()


def _oscillator(p, h, N):
    sys = damped_oscillator(p["m"], p["k"], p["r"])
    sol = damped_oscillator_solution(p["m"], p["k"], p["r"], p["q0"], p["v0"])
    return Setup(sys, np.array([p["q0"]]), np.array([p["v0"]]), h, N,
                 closed_form=lambda t: tuple(np.atleast_2d(x).T for x in sol(t)),
                 exact_system=exact_damped_oscillator(p["m"], p["k"], p["r"], h))


def _marsden_west(p, h, N):
    q0, v0 = marsden_west_initial_state(p["potential"])
    v0 = v0 * p["speed"] / 0.5
    return Setup(marsden_west(p["k"]), q0, v0, h, N, sample_box=((-1.0, 1.0),), probe_h=0.05)


def _polar(p, h, N):
    return Setup(polar_double_well(p["c"]), np.array([p["r0"], p["theta0"]]),
                 np.array([p["vr0"], p["vtheta0"]]), h, N,
                 generator=translation(2, 1, "rotation"),
                 sample_box=((0.5, 2.0), (-np.pi, np.pi)))


def _free(p, h, N):
    m, q0, v0 = p["m"], p["q0"], p["v0"]
    return Setup(free_particle(m), np.array([q0]), np.array([v0]), h, N,
                 generator=translation(1, 0, "translation"),
                 closed_form=lambda t: (np.atleast_2d(q0 + v0 * np.asarray(t)).T,
                                        np.full((np.size(t), 1), v0)))


SCENARIOS = {
    s.name: s for s in [
        Scenario("damped-oscillator", "m q'' + r q' + k q = 0 with Rayleigh damping",
                 {"m": 1.0, "k": 1.0, "r": 0.1, "q0": 1.0, "v0": 0.0}, 0.1, 100,
                 _oscillator, ("midpoint",), ("hj", "rayleigh")),
        Scenario("marsden-west", "planar double well with weak isotropic damping",
                 {"k": 1e-3, "potential": 0.15, "speed": 0.5}, 0.1, 5000,
                 _marsden_west, ("midpoint",), ("rayleigh",)),
        Scenario("polar-rayleigh", "double well in polar coordinates with radial damping",
                 {"c": 1e-2, "r0": 1.2, "theta0": 0.0, "vr0": 0.1, "vtheta0": 0.5}, 0.1, 1000,
                 _polar, ("midpoint",), ("noether",)),
        Scenario("free-particle", "force-free particle on a line",
                 {"m": 1.0, "q0": 0.0, "v0": 1.0}, 0.1, 10,
                 _free, ("midpoint",), ("noether", "hj")),
    ]
}


def list_scenarios():
    return [(s.name, s.description) for s in SCENARIOS.values()]


@dataclass
class RunConfig:
    """Resolved configuration of one run; its hash goes into report metadata."""

    scenario: str
    methods: List[str] = field(default_factory=list)
    overrides: Dict[str, float] = field(default_factory=dict)
    h: Optional[float] = None
    N: Optional[int] = None
    tol: float = 1e-12
    max_iter: int = 50
    seed: int = SEED

    def canonical(self):
        return json.dumps({"scenario": self.scenario, "methods": list(self.methods),
                           "overrides": dict(sorted(self.overrides.items())), "h": self.h,
                           "N": self.N, "tol": self.tol, "max_iter": self.max_iter,
                           "seed": self.seed}, sort_keys=True)

    def digest(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    @property
    def solver(self):
        return SolverConfig(tol=self.tol, max_iter=self.max_iter)


def resolve(config):
    """Validate a :class:`RunConfig` and build the scenario setup."""
    if config.scenario not in SCENARIOS:
        raise ConfigError("unknown scenario %r (try list-scenarios)" % config.scenario)
    sc = SCENARIOS[config.scenario]
    params = dict(sc.defaults)
    for key, value in config.overrides.items():
        if key not in params:
            raise ConfigError("scenario %s has no parameter %r (known: %s)"
                              % (sc.name, key, ", ".join(sorted(params))))
        try:
            params[key] = float(value)
        except (TypeError, ValueError):
            raise ConfigError("parameter %r needs a number, got %r" % (key, value))
    h = sc.h if config.h is None else float(config.h)
    N = sc.N if config.N is None else int(config.N)
    if not h > 0 or N < 1:
        raise ConfigError("need h > 0 and N >= 1")
    methods = list(config.methods) or list(sc.methods)
    for m in methods:
        if m not in ("midpoint", "exact") + CONTINUOUS_METHODS:
            raise ConfigError("unknown method %r" % m)
    try:
        setup = sc.build(params, h, N)
    except ForcedVIError as exc:
        raise ConfigError("invalid parameters for %s: %s" % (sc.name, exc))
    if "exact" in methods and setup.exact_system is None:
        raise ConfigError("scenario %s has no exact discretization" % sc.name)
    return sc, setup, methods


@dataclass
class MethodResult:
    method: str
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    J: Optional[np.ndarray] = None
    residual: Optional[np.ndarray] = None
    runtime: float = 0.0


def _run_method(setup, method, solver):
    sys = setup.continuous
    start = time.perf_counter()
    if method in CONTINUOUS_METHODS:
        tr = reference_integrate(sys, (setup.q0, setup.v0), setup.h, setup.N, method)
        p = tr.momenta(sys)
        E = tr.energies(sys)
        J = None
        if setup.generator is not None:
            J = np.array([p_k @ setup.generator(q_k) for q_k, p_k in zip(tr.q, p)])
        return MethodResult(method, tr.t, tr.q, p, E, J, None, time.perf_counter() - start)
    if method == "midpoint":
        ds = midpoint_discretize(sys, setup.h)
        seed = Seed.velocity(setup.q0, setup.v0, sys)
    else:
        ds = setup.exact_system
        q_exact, _ = setup.closed_form(np.array([0.0, setup.h]))
        seed = Seed.pair(q_exact[0], q_exact[1])
    tr = run_trajectory(ds, seed, setup.N, solver)
    q, p = tr.configs, tr.momenta
    E = np.array([energy(sys, (q_k, legendre_inverse(sys, q_k, p_k))) for q_k, p_k in zip(q, p)])
    J = None
    if setup.generator is not None:
        J = np.empty(len(q))
        J[:-1] = [momentum_map(ds, setup.generator, (q[k], q[k + 1]), "plus")
                  for k in range(len(q) - 1)]
        J[-1] = p[-1] @ setup.generator(q[-1])
    return MethodResult(method, tr.t, q, p, E, J, tr.diagnostics["residual_del"],
                        time.perf_counter() - start)


def _reference(setup, results=()):
    """Closed-form solution when available, else the benchmark integrator."""
    if setup.closed_form is not None:
        t = setup.h * np.arange(setup.N + 1)
        q, v = setup.closed_form(t)
        E = np.array([energy(setup.continuous, (a, b)) for a, b in zip(q, v)])
        return "closed-form", q, E
    for res in results:
        if res.method == "benchmark":
            return "benchmark", res.q, res.energy
    tr = reference_integrate(setup.continuous, (setup.q0, setup.v0), setup.h, setup.N, "benchmark")
    return "benchmark", tr.q, tr.energies(setup.continuous)


def _fmt(x):
    return "%.17g" % x


@dataclass
class RunReport:
    """Per-step table, summary numbers and run metadata."""

    columns: List[str]
    rows: np.ndarray
    summary: dict
    metadata: dict

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([_fmt(x) for x in row])

    def summary_json(self):
        return json.dumps({"summary": self.summary, "metadata": self.metadata},
                          indent=2, sort_keys=True)


def _columns(result, prefix, n):
    cols = (["q[%d]" % i for i in range(n)] + ["p[%d]" % i for i in range(n)] + ["energy"])
    data = [result.q, result.p, result.energy[:, None]]
    if result.J is not None:
        cols.append("J_xi")
        data.append(result.J[:, None])
    if result.residual is not None:
        cols.append("residual_del")
        data.append(result.residual[:, None])
    if prefix:
        cols = ["%s.%s" % (result.method, c) for c in cols]
    return cols, np.hstack(data)


def run_scenario(config):
    """Run the configured integrators on one scenario and build a report."""
    sc, setup, methods = resolve(config)
    results = [_run_method(setup, m, config.solver) for m in methods]
    ref_kind, ref_q, ref_E = _reference(setup, results)
    n = setup.q0.size
    columns = ["t"]
    blocks = [results[0].t[:, None]]
    for res in results:
        cols, block = _columns(res, len(results) > 1, n)
        columns += cols
        blocks.append(block)
    summary = {"reference": ref_kind, "methods": {}}
    for res in results:
        entry = {
            "terminal_q": [float(x) for x in res.q[-1]],
            "terminal_error": float(np.max(np.abs(res.q[-1] - ref_q[-1]))),
            "energy_error": float(np.max(np.abs(res.energy - ref_E))),
            "final_energy": float(res.energy[-1]),
        }
        if res.J is not None:
            entry["max_drift"] = float(np.max(np.abs(res.J[:-1] - res.J[0])))
        summary["methods"][res.method] = entry
    metadata = {"version": __version__, "config_hash": config.digest(), "seed": config.seed,
                "scenario": sc.name, "h": setup.h, "N": setup.N}
    report = RunReport(columns, np.hstack(blocks), summary, metadata)
    report.runtimes = {res.method: res.runtime for res in results}
    return report


@dataclass
class CompareTable:
    columns: List[str]
    rows: List[list]
    runtimes: Dict[str, float]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([row[0]] + [_fmt(x) for x in row[1:]])

    def format(self):
        cols = self.columns + ["runtime_s"]
        lines = ["  ".join("%-16s" % c for c in cols)]
        for row in self.rows:
            cells = [row[0]] + ["%.6e" % x for x in row[1:]] + ["%.3f" % self.runtimes[row[0]]]
            lines.append("  ".join("%-16s" % c for c in cells))
        return "\n".join(lines)


def compare_integrators(config):
    """Terminal and energy errors of each method against the reference solution.

    With a single method the table carries no comparison columns.
    """
    report = run_scenario(config)
    methods = list(report.summary["methods"])
    if len(methods) < 2:
        rows = [[m] for m in methods]
        return CompareTable(["method"], rows, report.runtimes), report
    rows = [[m, report.summary["methods"][m]["terminal_error"],
             report.summary["methods"][m]["energy_error"]] for m in methods]
    return CompareTable(["method", "terminal_error", "energy_error"], rows, report.runtimes), report


@dataclass
class VerifyResult:
    kind: str
    passed: bool
    message: str
    columns: List[str]
    rows: List[list]
    details: dict = field(default_factory=dict)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([x if isinstance(x, str) else _fmt(x) for x in row])


NOETHER_DRIFT_TOL = 1e-9
NOETHER_IDENTITY_TOL = 1e-10
HJ_TOL = 1e-9


def _sample_box_pairs(setup, samples, seed):
    rng = np.random.default_rng(seed)
    n = setup.q0.size
    box = list(setup.sample_box) * n if len(setup.sample_box) == 1 else list(setup.sample_box)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    q0 = rng.uniform(lo, hi, size=(samples, n))
    q1 = q0 + rng.uniform(-0.2, 0.2, size=(samples, n))
    return list(zip(q0, q1))


def _verify_noether(setup, config):
    if setup.generator is None:
        raise ConfigError("scenario has no symmetry generator")
    ds = midpoint_discretize(setup.continuous, setup.h)
    tr = run_trajectory(ds, Seed.velocity(setup.q0, setup.v0, setup.continuous), setup.N,
                        config.solver)
    q = tr.configs
    J = np.array([momentum_map(ds, setup.generator, (q[k], q[k + 1]), "plus")
                  for k in range(len(q) - 1)])
    drift = np.abs(J - J[0])
    n = q.shape[1]
    columns = ["k"] + ["q[%d]" % i for i in range(n)] + ["J_xi", "drift"]
    rows = [[k] + list(q[k]) + [J[k], drift[k]] for k in range(len(J))]
    identity = [abs(noether_residual(ds, setup.generator, pr) - momentum_jump(ds, setup.generator, pr))
                for pr in _sample_box_pairs(setup, 100, config.seed)]
    bad = np.nonzero(drift > NOETHER_DRIFT_TOL)[0]
    passed = bad.size == 0 and max(identity) <= NOETHER_IDENTITY_TOL
    msg = "max drift %.3e, max identity gap %.3e" % (drift.max(), max(identity))
    if bad.size:
        msg += "; first failing row k=%d" % bad[0]
    elif not passed:
        msg += "; identity gap above %.0e" % NOETHER_IDENTITY_TOL
    return VerifyResult("noether", passed, msg, columns, rows,
                        {"max_drift": float(drift.max()), "max_identity_gap": float(max(identity))})


def _verify_hj(setup, config):
    ds = midpoint_discretize(setup.continuous, setup.h)
    seed = Seed.velocity(setup.q0, setup.v0, setup.continuous)
    pair = seed_pair(ds, seed, config.solver)
    rep = hj_verify(ds, SummedAction(ds, ()), pair, setup.N, config.solver)
    n = setup.q0.size
    columns = (["k"] + ["q[%d]" % i for i in range(n)] + ["p[%d]" % i for i in range(n)]
               + ["hj_residual", "hamilton_residual"])
    rows = [[r.k] + list(r.q) + list(r.p) + [r.hj_residual, r.hamilton_residual] for r in rep.rows]
    passed = rep.passed(HJ_TOL)
    msg = "max HJ residual %.3e, max Hamilton residual %.3e, max gap to DEL %.3e" % (
        rep.max_hj, rep.max_hamilton, rep.max_del_gap)
    if not passed:
        k1 = rep.first_failure("hj_residual", HJ_TOL)
        k2 = rep.first_failure("hamilton_residual", HJ_TOL)
        first = min(k for k in (k1, k2) if k is not None) if (k1 is not None or k2 is not None) else None
        msg += "; first failing row k=%s" % first
    return VerifyResult("hj", passed, msg, columns, rows,
                        {"max_hj": rep.max_hj, "max_hamilton": rep.max_hamilton,
                         "max_del_gap": rep.max_del_gap})


def _verify_rayleigh(setup, config, samples=5, h=None):
    h = h or setup.probe_h or setup.h
    box = setup.sample_box[0]
    probe = rayleigh_conjecture_probe(setup.continuous, region=box, samples=samples, h=h,
                                      seed=config.seed)
    n = setup.q0.size
    columns = (["q0[%d]" % i for i in range(n)] + ["q1[%d]" % i for i in range(n)]
               + ["residual", "status"])
    rows = [list(r.q0) + list(r.q1) + [r.residual, r.status] for r in probe.rows]
    msg = "max Rayleigh-condition defect of exact forces %.3e (informational)" % probe.max_residual
    return VerifyResult("rayleigh", True, msg, columns, rows,
                        {"max_residual": probe.max_residual})


def verify(kind, config, samples=5, probe_h=None):
    """Run a verification suite; ``passed`` is False iff an assertion failed."""
    sc, setup, _ = resolve(config)
    if kind not in ("noether", "hj", "rayleigh"):
        raise ConfigError("unknown verification %r" % kind)
    if kind not in sc.verifications:
        raise ConfigError("scenario %s does not support %s verification" % (sc.name, kind))
    if kind == "noether":
        return _verify_noether(setup, config)
    if kind == "hj":
        return _verify_hj(setup, config)
    return _verify_rayleigh(setup, config, samples, probe_h)
