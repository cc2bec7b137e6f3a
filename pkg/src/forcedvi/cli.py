"""Command-line experiment runner.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 solver divergence.
"""

import argparse
import json
import os
import sys

from .errors import ConvergenceError, DivergenceError, RegularityError, NumericDomainError, ContractError
from .scenarios import (ConfigError, RunConfig, compare_integrators, list_scenarios,
                        run_scenario, verify)

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_DIVERGENCE = 0, 1, 2, 3
OUTPUT_DIR_ENV = "FORCEDVI_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, "%s: error: %s\n" % (self.prog, message))


def _add_run_options(p, methods_flag):
    p.add_argument("scenario", nargs="?", help="scenario name (see list-scenarios)")
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--h", type=float, help="time step")
    p.add_argument("--N", type=int, help="number of steps")
    p.add_argument(methods_flag, dest="methods",
                   help="comma-separated methods: midpoint, exact, euler, rk4, benchmark")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a scenario parameter (repeatable)")
    p.add_argument("--tol", type=float, help="Newton residual tolerance")
    p.add_argument("--max-iter", type=int, help="Newton iteration limit")
    p.add_argument("--seed", type=int, help="seed for sampled checks")
    p.add_argument("--out", help="output CSV path")


def build_parser():
    parser = _Parser(prog="forcedvi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list-scenarios", help="list built-in scenarios")
    _add_run_options(sub.add_parser("simulate", help="integrate a scenario and write a CSV"),
                     "--method")
    _add_run_options(sub.add_parser("compare", help="compare integrators on a scenario"),
                     "--methods")
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("kind", choices=["noether", "hj", "rayleigh"])
    _add_run_options(v, "--methods")
    v.add_argument("--samples", type=int, default=5, help="probe samples (rayleigh)")
    return parser


def load_config(args):
    """Merge the optional JSON file with command-line flags."""
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError("cannot read config %s: %s" % (args.config, exc))
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - {"scenario", "methods", "overrides", "h", "N", "solver",
                               "seed", "output"}
        if unknown:
            raise ConfigError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    solver = data.get("solver", {})
    overrides = dict(data.get("overrides", {}))
    for item in args.set:
        if "=" not in item:
            raise ConfigError("--set expects KEY=VALUE, got %r" % item)
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    methods = data.get("methods", [])
    if isinstance(methods, str):
        methods = methods.split(",")
    if args.methods:
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    scenario = args.scenario or data.get("scenario")
    if not scenario:
        raise ConfigError("no scenario given")
    cfg = RunConfig(scenario=scenario, methods=list(methods), overrides=overrides,
                    h=args.h if args.h is not None else data.get("h"),
                    N=args.N if args.N is not None else data.get("N"))
    cfg.tol = args.tol if args.tol is not None else solver.get("tol", cfg.tol)
    cfg.max_iter = args.max_iter if args.max_iter is not None else solver.get("max_iter", cfg.max_iter)
    cfg.seed = args.seed if args.seed is not None else data.get("seed", cfg.seed)
    try:
        cfg.solver
    except ValueError as exc:
        raise ConfigError(str(exc))
    out = args.out or data.get("output")
    return cfg, out


def _output_path(out, default_name):
    if out:
        return out
    return os.path.join(os.environ.get(OUTPUT_DIR_ENV, "."), default_name)


def _write_summary(csv_path, text):
    base, _ = os.path.splitext(csv_path)
    with open(base + ".summary.json", "w") as fh:
        fh.write(text + "\n")


def _run(args):
    if args.command == "list-scenarios":
        for name, desc in list_scenarios():
            print("%-20s %s" % (name, desc))
        return EXIT_OK
    cfg, out = load_config(args)
    if args.command == "simulate":
        report = run_scenario(cfg)
        path = _output_path(out, "%s-simulate.csv" % cfg.scenario)
        report.write_csv(path)
        _write_summary(path, report.summary_json())
        for method, entry in report.summary["methods"].items():
            print("%-10s terminal error %.3e  energy error %.3e  (vs %s)"
                  % (method, entry["terminal_error"], entry["energy_error"],
                     report.summary["reference"]))
        print("wrote %s" % path)
        return EXIT_OK
    if args.command == "compare":
        table, report = compare_integrators(cfg)
        path = _output_path(out, "%s-compare.csv" % cfg.scenario)
        table.write_csv(path)
        _write_summary(path, report.summary_json())
        print(table.format())
        print("wrote %s" % path)
        return EXIT_OK
    result = verify(args.kind, cfg, samples=args.samples)
    path = _output_path(out, "%s-verify-%s.csv" % (cfg.scenario, args.kind))
    result.write_csv(path)
    print("%s %s: %s" % (args.kind, "PASS" if result.passed else "FAIL", result.message))
    print("wrote %s" % path)
    return EXIT_OK if result.passed else EXIT_ASSERT


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (ConfigError, ContractError) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, ConvergenceError, RegularityError, NumericDomainError) as exc:
        step = getattr(exc, "step", None)
        tag = "" if step is None else " at step %d" % step
        print("solver divergence [%s]%s: %s" % (args.command, tag, exc), file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
