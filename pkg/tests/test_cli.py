"""Command-line contract: formats, exit codes, config handling, determinism."""

import json
import os
import subprocess
import sys

import pytest

from dlaguerre.cli import main

RUN = [sys.executable, "-m", "dlaguerre.cli"]


def run_cli(args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(RUN + args, capture_output=True, text=True, env=env)


class TestMoments:
    def test_origin_rows(self, tmp_path):
        out = tmp_path / "m.csv"
        res = run_cli(["moments", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                       "--t", "0", "--kmax", "2", "--format", "csv",
                       "--out", str(out)])
        assert res.returncode == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("k,closed_form,quadrature")
        vals = [line.split(",")[1] for line in lines[1:]]
        assert [float(v) for v in vals] == [12.0, 60.0, 360.0]

    def test_json_has_provenance(self, tmp_path):
        out = tmp_path / "m.json"
        res = run_cli(["moments", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                       "--t", "0.3", "--kmax", "1", "--out", str(out)])
        assert res.returncode == 0
        doc = json.loads(out.read_text())
        assert doc["metadata"]["schema_version"] == 1
        assert doc["params"]["t"] == "0.3"
        row = doc["moments"][0]
        assert {"k", "closed_form", "quadrature",
                "relative_difference"} <= set(row)
        assert float(row["relative_difference"]) < 1e-25

    def test_missing_t_usage_error(self):
        res = run_cli(["moments", "--alpha", "2", "--mu", "2", "--zeta", "0.5"])
        assert res.returncode == 2
        assert "usage" in res.stderr.lower()

    def test_invalid_zeta(self):
        res = run_cli(["moments", "--alpha", "2", "--mu", "2", "--zeta", "1.5",
                       "--t", "0.3"])
        assert res.returncode == 2

    def test_deterministic_output(self, tmp_path):
        args = ["moments", "--alpha", "2", "--mu", "1", "--zeta", "0.5",
                "--t", "0.3", "--kmax", "1"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(args + ["--out", str(a)]).returncode == 0
        assert run_cli(args + ["--out", str(b)]).returncode == 0
        assert a.read_bytes() == b.read_bytes()

    def test_stamp_adds_timestamp(self, tmp_path):
        out = tmp_path / "m.json"
        run_cli(["moments", "--alpha", "2", "--mu", "1", "--zeta", "0",
                 "--t", "0.3", "--kmax", "0", "--stamp", "--out", str(out)])
        assert "timestamp" in json.loads(out.read_text())["metadata"]

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "alpha = 2   # exponent\nmu = 2\nzeta = 0.5\nt = 0.3\nkmax = 1\n")
        out = tmp_path / "m.json"
        res = run_cli(["moments", "--config", str(cfg), "--t", "0",
                       "--out", str(out)])
        assert res.returncode == 0
        doc = json.loads(out.read_text())
        # the command-line --t overrides the file value
        assert doc["params"]["t"] == "0"
        assert float(doc["moments"][0]["closed_form"]) == 12.0

    def test_env_prec_bits(self, tmp_path):
        out = tmp_path / "m.json"
        res = run_cli(["moments", "--alpha", "2", "--mu", "1", "--zeta", "0",
                       "--t", "0.3", "--kmax", "0", "--out", str(out)],
                      env_extra={"DLL_PREC_BITS": "128"})
        assert res.returncode == 0
        assert json.loads(out.read_text())["metadata"]["prec_bits"] == 128


class TestEvolve:
    def test_single_row_trajectory(self, tmp_path):
        out = tmp_path / "traj.json"
        res = run_cli(["evolve", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                       "--n", "1", "--t0", "0.003", "--t1", "0.003",
                       "--out", str(out)])
        assert res.returncode == 0
        doc = json.loads(out.read_text())
        assert len(doc["trajectory"]) == 1

    def test_full_run_summary(self, tmp_path):
        out = tmp_path / "traj.json"
        res = run_cli(["evolve", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                       "--n", "1", "--t0", "1e-3", "--t1", "0.3",
                       "--out", str(out)])
        assert res.returncode == 0
        doc = json.loads(out.read_text())
        s = doc["summary"]
        assert float(s["endpoint_vs_hankel_rel"]) < 1e-6
        assert float(s["pv_residual"]) < 1e-8
        cols = set(doc["trajectory"][0])
        assert {"t", "theta", "kappa", "q", "p", "H"} <= cols

    def test_cor12_convention(self, tmp_path):
        out = tmp_path / "traj.json"
        res = run_cli(["evolve", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                       "--n", "1", "--t0", "1e-3", "--t1", "0.3",
                       "--convention", "cor12", "--out", str(out)])
        assert res.returncode == 0
        doc = json.loads(out.read_text())
        assert float(doc["summary"]["pv_residual"]) < 1e-8

    def test_missing_range(self):
        res = run_cli(["evolve", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                       "--n", "1", "--t0", "1e-3"])
        assert res.returncode == 2


class TestVerify:
    def test_default_passes(self, tmp_path):
        out = tmp_path / "rep.json"
        res = run_cli(["verify", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                       "--t", "0.3", "--nmax", "2", "--fast",
                       "--out", str(out)])
        assert res.returncode == 0
        doc = json.loads(out.read_text())
        assert doc["all_passed"] is True
        rec = doc["identities"]["records"][0]
        assert {"id", "formula", "residual", "threshold", "passed"} <= set(rec)

    def test_unreachable_threshold_flags_failures(self, tmp_path):
        """At 128 bits a 1e-40 threshold is below the noise floor: exit 4."""
        out = tmp_path / "rep.json"
        res = run_cli(["verify", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                       "--t", "0.3", "--nmax", "2", "--fast",
                       "--prec-bits", "128", "--tol", "1e-20",
                       "--threshold", "1e-40", "--out", str(out)])
        assert res.returncode == 4
        doc = json.loads(out.read_text())
        assert doc["identities"]["n_failures"] > 0


class TestInProcess:
    def test_main_returns_usage_code(self, capsys):
        assert main(["moments", "--alpha", "2", "--mu", "2",
                     "--zeta", "0.5"]) == 2

    def test_main_moment_stdout(self, capsys):
        assert main(["moments", "--alpha", "2", "--mu", "2", "--zeta", "0.5",
                     "--t", "0", "--kmax", "0", "--format", "csv"]) == 0
        assert "12.0" in capsys.readouterr().out
