import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from forcedvi.cli import EXIT_ASSERT, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_OK, OUTPUT_DIR_ENV, main
from forcedvi.scenarios import SCENARIOS, ConfigError, RunConfig, compare_integrators, run_scenario


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    return tmp_path


class TestListScenarios:
    def test_lists_every_scenario(self, capsys):
        assert main(["list-scenarios"]) == EXIT_OK
        out = capsys.readouterr().out
        for name in SCENARIOS:
            assert name in out


class TestSimulate:
    def test_row_count(self, outdir):
        assert main(["simulate", "damped-oscillator", "--h", "0.1", "--N", "100",
                     "--method", "midpoint"]) == EXIT_OK
        header, rows = read_csv(outdir / "damped-oscillator-simulate.csv")
        assert header == ["t", "q[0]", "p[0]", "energy", "residual_del"]
        assert len(rows) == 101

    def test_exact_method_matches_closed_form(self, outdir):
        assert main(["simulate", "damped-oscillator", "--method", "exact"]) == EXIT_OK
        summary = json.load(open(outdir / "damped-oscillator-simulate.summary.json"))
        entry = summary["summary"]["methods"]["exact"]
        assert summary["summary"]["reference"] == "closed-form"
        assert entry["terminal_error"] < 1e-10

    def test_seventeen_digits(self, outdir):
        main(["simulate", "free-particle", "--N", "3"])
        _, rows = read_csv(outdir / "free-particle-simulate.csv")
        assert float(rows[1][0]) == 0.1
        assert rows[2][0] == "%.17g" % 0.2

    def test_multi_method_columns(self, outdir):
        assert main(["simulate", "polar-rayleigh", "--N", "20",
                     "--method", "midpoint,rk4,benchmark"]) == EXIT_OK
        header, rows = read_csv(outdir / "polar-rayleigh-simulate.csv")
        for m in ("midpoint", "rk4", "benchmark"):
            assert "%s.energy" % m in header and "%s.J_xi" % m in header
        assert "midpoint.residual_del" in header and "rk4.residual_del" not in header
        assert len(rows) == 21

    def test_deterministic_bytes(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            assert main(["simulate", "marsden-west", "--N", "50", "--method", "midpoint,rk4",
                         "--out", str(p)]) == EXIT_OK
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_metadata(self, outdir):
        main(["simulate", "free-particle", "--seed", "7"])
        meta = json.load(open(outdir / "free-particle-simulate.summary.json"))["metadata"]
        assert meta["seed"] == 7 and meta["N"] == 10 and len(meta["config_hash"]) == 16

    def test_config_file_and_flag_override(self, tmp_path):
        out = tmp_path / "run.csv"
        cfg = {"scenario": "damped-oscillator", "overrides": {"r": 0.2}, "h": 0.05, "N": 40,
               "solver": {"tol": 1e-12, "max_iter": 30}, "output": str(out)}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert main(["simulate", "--config", str(path), "--N", "10"]) == EXIT_OK
        _, rows = read_csv(out)
        assert len(rows) == 11
        assert float(rows[-1][0]) == pytest.approx(0.5)
        meta = json.load(open(tmp_path / "run.summary.json"))["metadata"]
        assert meta["h"] == 0.05

    def test_override_changes_hash(self):
        a = RunConfig("damped-oscillator")
        b = RunConfig("damped-oscillator", overrides={"r": 0.2})
        assert a.digest() != b.digest() and a.digest() == RunConfig("damped-oscillator").digest()


class TestCompare:
    def test_marsden_west_table(self, outdir, capsys):
        assert main(["compare", "marsden-west", "--N", "200", "--methods", "midpoint,rk4"]) == EXIT_OK
        header, rows = read_csv(outdir / "marsden-west-compare.csv")
        assert header == ["method", "terminal_error", "energy_error"]
        assert [r[0] for r in rows] == ["midpoint", "rk4"]
        assert "runtime_s" in capsys.readouterr().out

    def test_single_method_is_degenerate(self):
        table, _ = compare_integrators(RunConfig("free-particle", methods=["midpoint"]))
        assert table.columns == ["method"] and table.rows == [["midpoint"]]

    def test_convergence_sweep(self):
        errs = [run_scenario(RunConfig("damped-oscillator", h=h, N=int(round(1.0 / h))))
                .summary["methods"]["midpoint"]["terminal_error"] for h in (0.1, 0.05, 0.025)]
        ratios = np.array(errs[:-1]) / np.array(errs[1:])
        assert np.all((ratios > 3.2) & (ratios < 4.8))


class TestVerify:
    def test_noether(self, outdir):
        assert main(["verify", "noether", "polar-rayleigh"]) == EXIT_OK
        header, rows = read_csv(outdir / "polar-rayleigh-verify-noether.csv")
        assert header == ["k", "q[0]", "q[1]", "J_xi", "drift"]
        assert max(float(r[-1]) for r in rows) < 1e-9

    def test_hj(self, outdir):
        assert main(["verify", "hj", "damped-oscillator"]) == EXIT_OK
        header, rows = read_csv(outdir / "damped-oscillator-verify-hj.csv")
        assert header == ["k", "q[0]", "p[0]", "hj_residual", "hamilton_residual"]
        assert len(rows) == 101
        assert max(max(abs(float(r[3])), abs(float(r[4]))) for r in rows) < 1e-9

    def test_rayleigh_is_informational(self, outdir):
        assert main(["verify", "rayleigh", "marsden-west", "--samples", "1"]) == EXIT_OK
        header, rows = read_csv(outdir / "marsden-west-verify-rayleigh.csv")
        assert header[-2:] == ["residual", "status"] and len(rows) == 1

    def test_assertion_failure_names_first_row(self, outdir, capsys):
        # a loose Newton tolerance leaves the momentum map drifting above 1e-9
        assert main(["verify", "noether", "polar-rayleigh", "--tol", "1e-5"]) == EXIT_ASSERT
        assert "first failing row k=" in capsys.readouterr().out

    def test_unsupported_verification(self, outdir):
        assert main(["verify", "noether", "damped-oscillator"]) == EXIT_CONFIG


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["simulate", "no-such-scenario"],
        ["simulate", "damped-oscillator", "--set", "zeta=1"],
        ["simulate", "damped-oscillator", "--set", "r=abc"],
        ["simulate", "damped-oscillator", "--set", "r"],
        ["simulate", "damped-oscillator", "--method", "leapfrog"],
        ["simulate", "damped-oscillator", "--N", "0"],
        ["simulate", "marsden-west", "--method", "exact"],
        ["simulate", "damped-oscillator", "--set", "r=5"],
        ["simulate"],
        ["simulate", "--config", "/nonexistent/cfg.json"],
    ])
    def test_config_errors(self, argv, outdir):
        assert main(argv) == EXIT_CONFIG

    def test_bad_flag_exit_code(self):
        with pytest.raises(SystemExit) as info:
            main(["simulate", "damped-oscillator", "--bogus"])
        assert info.value.code == EXIT_CONFIG

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"scenario": "free-particle", "colour": "red"}))
        assert main(["simulate", "--config", str(path)]) == EXIT_CONFIG

    def test_newton_divergence(self, outdir, capsys):
        assert main(["simulate", "marsden-west", "--N", "20", "--max-iter", "1"]) == EXIT_DIVERGENCE
        assert "solver divergence [simulate]" in capsys.readouterr().err

    def test_explicit_blow_up(self, outdir, capsys):
        assert main(["simulate", "damped-oscillator", "--method", "rk4",
                     "--h", "50", "--N", "100"]) == EXIT_DIVERGENCE
        assert "at step" in capsys.readouterr().err

    def test_config_error_type(self):
        with pytest.raises(ConfigError):
            run_scenario(RunConfig("nope"))


def test_module_entry_point(tmp_path):
    env = dict(os.environ, **{OUTPUT_DIR_ENV: str(tmp_path)})
    proc = subprocess.run([sys.executable, "-m", "forcedvi", "simulate", "free-particle"],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "free-particle-simulate.csv").exists()
