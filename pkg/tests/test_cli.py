import csv
import io
import json
import subprocess
import sys

import pytest

from seqtest import ProblemParams, make_penalty, solve
from seqtest.solver import tangent_residuals
from seqtest import cli
from seqtest.cli import SOLVE_FIELDS, SWEEP_HEADER, main

from reference_values import TANGENT


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSolve:
    def test_json_fields(self):
        code, text = run(["solve", "ce:1,1", "--K", "16", "--json"])
        assert code == 0
        doc = json.loads(text)
        assert set(SOLVE_FIELDS) <= set(doc)
        assert doc["A"] == pytest.approx(TANGENT[("ce:1,1", 16)][0], abs=1e-11)
        assert set(doc["manifest"]) == {"command", "penalty", "params", "tool_version",
                                        "seed", "timestamp"}

    def test_csv_header_golden(self):
        code, text = run(["solve", "l1", "--K", "16", "--csv"])
        assert code == 0
        assert text.splitlines()[0] == "K,A,B,pi_lo,pi_hi,pi_under,pi_over,slope,intercept,degenerate,method"
        (row,) = read_csv(text)
        assert row["degenerate"] == "0" and row["method"] == "tangent"

    def test_alpha_form_equals_K(self):
        _, by_k = run(["solve", "ce:1,1", "--K", "16", "--csv"])
        _, by_alpha = run(["solve", "ce:1,1", "--alpha", "4", "--csv"])
        assert by_k == by_alpha

    def test_degenerate_exit(self):
        code, text = run(["solve", "ce:1,1", "--K", "6", "--csv"])
        assert code == 2
        (row,) = read_csv(text)
        assert row["degenerate"] == "1" and row["A"] == ""

    def test_output_reverifies(self):
        _, text = run(["solve", "ce:2,1", "--K", "10", "--json"])
        doc = json.loads(text)
        p = cli.parse_penalty("ce:2,1")
        params = ProblemParams.from_K(10)
        sol = solve(p, params)
        # 12 significant digits are kept, so the printed values reproduce the solution to ~1e-12
        assert abs(doc["A"] - sol.a_star) <= 1e-12 and abs(doc["B"] - sol.b_star) <= 1e-12
        assert max(tangent_residuals(p, params, sol)) <= 1e-10

    @pytest.mark.parametrize("argv", [
        ["solve", "hinge", "--K", "16"],
        ["solve", "ce:1,1"],
        ["solve", "ce:1,1", "--K", "16", "--alpha", "4"],
        ["solve", "ce:1,1", "--K", "-3"],
        ["solve", "ce:1,1", "--K", "16", "--tol", "1e-3"],
    ])
    def test_usage_errors(self, argv):
        assert run(argv)[0] == 1

    def test_argparse_errors_exit_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "ce:1,1", "--K", "abc"])
        assert exc.value.code == 1


class TestSweep:
    def test_header_golden(self):
        code, text = run(["sweep", "ce:1,1", "--K-min", "4", "--K-max", "16", "--points", "4"])
        assert code == 0
        assert text.splitlines()[0] == "K,A,B,pi_lo,pi_hi,dA_dK,dB_dK,degenerate"
        rows = read_csv(text)
        assert [r["degenerate"] for r in rows] == ["1", "1", "0", "0"]
        assert rows[0]["A"] == "" and float(rows[3]["dA_dK"]) < 0

    def test_single_point_degenerate(self):
        code, text = run(["sweep", "l1", "--K-min", "5", "--points", "1"])
        assert code == 0
        (row,) = read_csv(text)
        assert list(row) == SWEEP_HEADER
        assert row["degenerate"] == "1" and float(row["K"]) == 5

    def test_writes_file_and_manifest(self, tmp_path):
        out = tmp_path / "l1.csv"
        code, _ = run(["sweep", "l1", "--K-min", "10", "--K-max", "100", "--points", "5",
                       "--log", "--out", str(out)])
        assert code == 0
        rows = read_csv(out.read_text())
        assert float(rows[-1]["K"]) == pytest.approx(100)
        man = json.loads((tmp_path / "l1.csv.manifest.json").read_text())
        assert man["command"] == "sweep" and man["K_grid"]["log"] is True

    def test_unwritable_path(self, tmp_path):
        bad = tmp_path / "missing" / "out.csv"
        assert run(["sweep", "l1", "--K-min", "10", "--points", "1", "--out", str(bad)])[0] == 1

    def test_bad_range(self):
        assert run(["sweep", "l1", "--K-min", "10", "--K-max", "5", "--points", "3"])[0] == 1


class TestSimulate:
    ARGS = ["simulate", "ce:1,1", "--K", "16", "--prior", "0.5", "--paths", "200",
            "--dt", "1e-3", "--perturb", "0.05"]

    def test_seed_reproducible(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        code, first = run(self.ARGS + ["--seed", "9"])
        assert code == 0
        assert run(self.ARGS + ["--seed", "9"])[1] == first
        doc = json.loads(first)
        assert doc["manifest"]["seed"] == 9
        assert [p["label"] for p in doc["perturbations"]] == ["A-d", "A+d", "B-d", "B+d"]
        assert {"optimal", "boundaries", "value_at_prior", "dt_allowance"} <= set(doc)

    def test_env_seed(self, monkeypatch):
        monkeypatch.setenv("SEQTEST_SEED", "42")
        doc = json.loads(run(self.ARGS)[1])
        assert doc["manifest"]["seed"] == 42

    def test_bad_env_seed(self, monkeypatch):
        monkeypatch.setenv("SEQTEST_SEED", "forty")
        assert run(self.ARGS)[0] == 1

    def test_random_seed_recorded(self, monkeypatch):
        monkeypatch.delenv("SEQTEST_SEED", raising=False)
        doc = json.loads(run(self.ARGS)[1])
        assert isinstance(doc["manifest"]["seed"], int)

    def test_degenerate_note(self):
        code, text = run(["simulate", "l1", "--K", "4", "--prior", "0.3", "--seed", "1"])
        assert code == 0
        doc = json.loads(text)
        assert doc["degenerate"] is True and "note" in doc and "optimal" not in doc
        assert doc["value_at_prior"] == pytest.approx(2 * 0.3 * 0.7)

    def test_bad_dt(self):
        assert run(["simulate", "ce:1,1", "--K", "16", "--prior", "0.5", "--dt", "1",
                    "--seed", "1"])[0] == 1


class TestValidate:
    def test_passes(self):
        code, text = run(["validate", "l1", "--K", "16"])
        assert code == 0
        assert "FAIL" not in text
        names = [line.split()[0] for line in text.splitlines()]
        assert names == ["assumptions", "solve", "residuals", "envelope", "agreement"]

    def test_degenerate_passes(self):
        code, text = run(["validate", "ce:1,1", "--K", "5"])
        assert code == 0 and "both degenerate" in text

    def test_failing_penalty(self, monkeypatch):
        bumpy = make_penalty(
            "bumpy",
            g=lambda x: x - x**2 + 8 * x**3 - 8 * x**4,
            g1=lambda x: 1 - 2 * x + 24 * x**2 - 32 * x**3,
            g2=lambda x: -2 + 48 * x - 96 * x**2,
            pi0=0.5,
        )
        monkeypatch.setattr(cli, "parse_penalty", lambda text: bumpy)
        code, text = run(["validate", "bumpy", "--K", "16"])
        assert code == 3
        assert text.splitlines()[-1] == "first failing check: assumptions"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "seqtest", "solve", "ce:1,1", "--K", "6"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "degenerate" in proc.stdout
