"""CLI: config validation, output schemas, determinism, exit codes."""

import csv
import json
import math
import subprocess
import sys

import pytest
import yaml

from gencount import cli

RUN = [sys.executable, "-m", "gencount.cli"]


def write_config(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def run_cli(args):
    return subprocess.run(RUN + args, capture_output=True, text=True)


BASE_GSP = {
    "config_version": 1,
    "process": "gsp",
    "rates": {"up": [1.0], "down": [0.5]},
    "times": [1.0],
    "n_range": [-10, 10],
    "seed": 42,
}


class TestConfigValidation:
    def test_missing_process(self):
        with pytest.raises(cli.ConfigError, match="process"):
            cli.parse_config({"config_version": 1, "rates": [1.0]})

    def test_version_required(self):
        with pytest.raises(cli.ConfigError, match="config_version"):
            cli.parse_config({"process": "gcp", "rates": [1.0]})

    def test_alpha_range(self):
        doc = dict(BASE_GSP, process="gfsp", alpha=1.5)
        with pytest.raises(cli.ConfigError, match="alpha"):
            cli.parse_config(doc)

    def test_integer_process_needs_alpha_one(self):
        doc = dict(BASE_GSP, alpha=0.5)
        with pytest.raises(cli.ConfigError, match="alpha = 1"):
            cli.parse_config(doc)

    def test_two_sided_rates_shape(self):
        doc = dict(BASE_GSP, rates=[1.0])
        with pytest.raises(cli.ConfigError, match="up"):
            cli.parse_config(doc)

    def test_subordinator_required(self):
        doc = {"config_version": 1, "process": "tcgcp1", "rates": [1.0]}
        with pytest.raises(cli.ConfigError, match="subordinator"):
            cli.parse_config(doc)

    def test_forward_rejects_stable(self):
        doc = {"config_version": 1, "process": "tcgcp1", "rates": [1.0],
               "subordinator": {"family": "stable", "alpha": 0.5}}
        with pytest.raises(cli.ConfigError, match="stable"):
            cli.parse_config(doc)

    def test_unknown_keys_rejected(self):
        doc = dict(BASE_GSP, bogus=1)
        with pytest.raises(cli.ConfigError, match="bogus"):
            cli.parse_config(doc)

    def test_defaults(self):
        exp = cli.parse_config({"config_version": 1, "process": "gcp",
                                "rates": [1.0]})
        assert exp.alpha == 1.0
        assert exp.times == (1.0,)
        assert exp.paths == 100_000
        assert exp.seed == 0
        assert exp.method == "exact"
        assert (exp.n_lo, exp.n_hi) == (0, 40)


class TestExitCodes:
    def test_invalid_config_exit_2_no_output(self, tmp_path):
        cfg = write_config(tmp_path, dict(BASE_GSP, process="gfsp", alpha=1.5))
        out = tmp_path / "never.csv"
        res = run_cli(["pmf", "--config", cfg, "--out", str(out)])
        assert res.returncode == 2
        assert "alpha" in res.stderr
        assert not out.exists()

    def test_unsupported_method_combination(self, tmp_path):
        doc = {"config_version": 1, "process": "tcgcp2", "rates": [1.0, 1.0],
               "subordinator": {"family": "gamma", "a": 1.0, "b": 1.0},
               "method": "exact"}
        cfg = write_config(tmp_path, doc)
        res = run_cli(["pmf", "--config", cfg, "--out", str(tmp_path / "x.csv")])
        assert res.returncode == 2
        assert not (tmp_path / "x.csv").exists()

    def test_numerical_failure_is_json_exit_1(self, tmp_path):
        # gfcp quadrature at alpha far from 1/2 exceeds the Wright domain
        doc = {"config_version": 1, "process": "gfcp", "rates": [1.0],
               "alpha": 0.7, "method": "quadrature", "n_range": [0, 3]}
        cfg = write_config(tmp_path, doc)
        res = run_cli(["pmf", "--config", cfg, "--out", str(tmp_path / "x.csv")])
        assert res.returncode == 1
        err = json.loads(res.stderr.strip().splitlines()[-1])
        assert err["type"] == "StabilityError"


class TestPmfCommand:
    def test_gsp_rows_sum(self, tmp_path):
        cfg = write_config(tmp_path, dict(
            BASE_GSP, rates={"up": [0.5, 0.5], "down": [0.5, 0.5]}))
        out = tmp_path / "pmf.csv"
        res = run_cli(["pmf", "--config", cfg, "--out", str(out)])
        assert res.returncode == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 21
        assert sum(float(r["probability"]) for r in rows) >= 0.999
        assert all(r["stderr"] == "" for r in rows)

    def test_mc_method_has_stderr(self, tmp_path):
        doc = {"config_version": 1, "process": "tcgcp2", "rates": [1.0],
               "subordinator": {"family": "gamma", "a": 1.0, "b": 1.0},
               "method": "mc", "paths": 2000, "n_range": [0, 10], "seed": 7}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "pmf.csv"
        assert run_cli(["pmf", "--config", cfg, "--out", str(out)]).returncode == 0
        rows = list(csv.DictReader(out.open()))
        assert all(float(r["stderr"]) > 0.0 for r in rows if float(r["probability"]) > 0)
        assert all(r["method"] == "mc" for r in rows)

    def test_one_sided_clamps_negative_range(self, tmp_path):
        doc = {"config_version": 1, "process": "gcp", "rates": [1.0],
               "n_range": [-5, 5]}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "pmf.csv"
        assert run_cli(["pmf", "--config", cfg, "--out", str(out)]).returncode == 0
        rows = list(csv.DictReader(out.open()))
        assert [int(r["n"]) for r in rows] == list(range(0, 6))


class TestSimulateDeterminism:
    def test_byte_identical_across_threads(self, tmp_path):
        doc = {"config_version": 1, "process": "gfsp",
               "rates": {"up": [1.0], "down": [0.5]}, "alpha": 0.7,
               "times": [0.5, 1.0], "paths": 2000, "seed": 11,
               "grid_step": 0.01}
        cfg = write_config(tmp_path, doc)
        outputs = []
        for threads in (1, 4, 8):
            out = tmp_path / f"sim{threads}.csv"
            res = run_cli(["simulate", "--config", cfg, "--out", str(out),
                           "--threads", str(threads)])
            assert res.returncode == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_config(tmp_path, dict(BASE_GSP, paths=500))
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        run_cli(["simulate", "--config", cfg, "--out", str(out_a)])
        run_cli(["simulate", "--config", cfg, "--out", str(out_b), "--seed", "99"])
        assert out_a.read_bytes() != out_b.read_bytes()

    def test_schema(self, tmp_path):
        cfg = write_config(tmp_path, dict(BASE_GSP, paths=50, times=[1.0, 2.0]))
        out = tmp_path / "sim.csv"
        run_cli(["simulate", "--config", cfg, "--out", str(out)])
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 100
        assert set(rows[0]) == {"path", "time", "value"}


class TestMomentsCommand:
    def test_exact_process(self, tmp_path):
        doc = {"config_version": 1, "process": "gcp", "rates": [1.0, 2.0],
               "times": [1.0, 2.0]}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "m.csv"
        assert run_cli(["moments", "--config", cfg, "--out", str(out)]).returncode == 0
        rows = list(csv.DictReader(out.open()))
        assert float(rows[1]["mean"]) == pytest.approx(10.0)
        assert float(rows[1]["var"]) == pytest.approx(18.0)
        assert rows[0]["mean_se"] == ""

    def test_mc_process_has_se(self, tmp_path):
        doc = {"config_version": 1, "process": "tcgfcp1", "rates": [1.0],
               "subordinator": {"family": "gamma", "a": 1.0, "b": 1.0},
               "alpha": 0.5, "times": [1.0], "paths": 5000, "seed": 3}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "m.csv"
        assert run_cli(["moments", "--config", cfg, "--out", str(out)]).returncode == 0
        rows = list(csv.DictReader(out.open()))
        assert float(rows[0]["mean_se"]) > 0.0


class TestLrdCommand:
    def test_gfsp_slope_in_band(self, tmp_path):
        doc = {"config_version": 1, "process": "gfsp",
               "rates": {"up": [1.0, 1.0], "down": [0.1, 0.1]}, "alpha": 0.7,
               "times": [50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0,
                         400.0, 450.0, 500.0], "s": 5.0}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "lrd.csv"
        assert run_cli(["lrd", "--config", cfg, "--out", str(out)]).returncode == 0
        fit = json.loads((tmp_path / "lrd.csv.fit.json").read_text())
        assert -0.8 < fit["slope"] < -0.6
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 10

    def test_needs_five_points(self, tmp_path):
        doc = {"config_version": 1, "process": "gfsp",
               "rates": {"up": [1.0], "down": [0.5]}, "alpha": 0.7,
               "times": [50.0, 100.0], "s": 5.0}
        cfg = write_config(tmp_path, doc)
        res = run_cli(["lrd", "--config", cfg, "--out", str(tmp_path / "x.csv")])
        assert res.returncode == 2

    def test_mc_correlations_carry_stderr(self, tmp_path):
        doc = {"config_version": 1, "process": "tcgfcp1", "rates": [1.0],
               "subordinator": {"family": "gamma", "a": 1.0, "b": 1.0},
               "alpha": 0.7, "times": [10.0, 20.0, 30.0, 40.0, 50.0],
               "s": 2.0, "paths": 5000, "seed": 4}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "lrd.csv"
        assert run_cli(["lrd", "--config", cfg, "--out", str(out)]).returncode == 0
        rows = list(csv.DictReader(out.open()))
        assert all(float(r["corr_se"]) > 0.0 for r in rows)


class TestResidualsCommand:
    def test_gsp_all_pass(self, tmp_path):
        doc = {"config_version": 1, "process": "gsp",
               "rates": {"up": [1.0], "down": [1.0]},
               "times": [0.5, 1.0, 2.0], "n_range": [-3, 3]}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "res.csv"
        assert run_cli(["residuals", "--config", cfg, "--out", str(out)]).returncode == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 21
        assert all(r["pass"] == "True" for r in rows)
        assert all(float(r["residual"]) < float(r["tolerance"]) for r in rows)

    def test_unsupported_process(self, tmp_path):
        doc = {"config_version": 1, "process": "tcgfcp2", "rates": [1.0],
               "subordinator": {"family": "gamma", "a": 1.0, "b": 1.0},
               "alpha": 0.5}
        cfg = write_config(tmp_path, doc)
        res = run_cli(["residuals", "--config", cfg,
                       "--out", str(tmp_path / "x.csv")])
        assert res.returncode == 2


def test_threads_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("GENCOUNT_THREADS", "3")
    assert cli._threads_option(None) == 3
    monkeypatch.setenv("GENCOUNT_THREADS", "junk")
    with pytest.raises(cli.ConfigError):
        cli._threads_option(None)
    assert cli._threads_option(2) == 2


def test_output_path_from_config(tmp_path):
    out = tmp_path / "from_config.csv"
    cfg = write_config(tmp_path, dict(BASE_GSP, output=str(out)))
    res = run_cli(["pmf", "--config", cfg])
    assert res.returncode == 0
    assert out.exists()


def test_oracle_compare_passes():
    res = run_cli(["oracle-compare"])
    assert res.returncode == 0, res.stdout + res.stderr
    assert "overall: PASS" in res.stdout
    assert res.stdout.count("PASS") >= 8


def test_float_format_shortest_roundtrip(tmp_path):
    cfg = write_config(tmp_path, BASE_GSP)
    out = tmp_path / "pmf.csv"
    run_cli(["pmf", "--config", cfg, "--out", str(out)])
    for row in csv.DictReader(out.open()):
        p = row["probability"]
        assert repr(float(p)) == p
