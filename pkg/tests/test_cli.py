"""Command-line driver: reports, exit codes, determinism, config diagnostics."""

import json
from pathlib import Path

import pytest

from dcvortex import cli
from dcvortex.config import ConfigError, parse_config
from dcvortex.report import Report, make_check

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


SMALL_SOLVE = """
[grid]
n = 16

[bundles]
degrees1 = 0
degrees2 = 0

[constants]
sigma = 2

[fields]
psi = constant 1

[solver]
target_residual = 1e-7
"""


class TestCommands:
    def test_deg_p1_command(self, tmp_path, capsys):
        rc = cli.main(["deg-p1", "2", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "PASS deg_p1(2)" in out
        report = json.loads((tmp_path / "deg_p1_report.json").read_text())
        assert report["verification"]["value"] == pytest.approx(2.0, abs=1e-6)

    def test_deg_p1_impossible_tolerance_exit_2(self, tmp_path):
        # the measured error is exactly zero here, so force a failing check
        rc = cli.main(["deg-p1", "2", "--out", str(tmp_path), "--tol", "-1"])
        assert rc == 2

    def test_tolerances_section_parsed(self, tmp_path):
        text = SMALL_SOLVE + "\n[tolerances]\nconstraint = 1e-8\ncheck = 1e-5\n"
        cfg = parse_config(write_config(tmp_path, text))
        assert cfg.constraint_tol == 1e-8
        assert cfg.check_tol == 1e-5
        bad = SMALL_SOLVE + "\n[tolerances]\ncheck = -1\n"
        with pytest.raises(ConfigError):
            parse_config(write_config(tmp_path, bad, name="bad.ini"))

    def test_solve_command_stable(self, tmp_path):
        cfg = write_config(tmp_path, SMALL_SOLVE)
        rc = cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 0
        report = json.loads((tmp_path / "out" / "solve_report.json").read_text())
        assert report["solver"]["converged"]
        assert report["constants"]["tau"] == "1/1"
        csv_text = (tmp_path / "out" / "history.csv").read_text()
        assert csv_text.splitlines()[0] == "iteration,sup_R1,sup_R2"

    def test_solve_command_unstable_exit_2(self, tmp_path):
        text = SMALL_SOLVE.replace("psi = constant 1", "psi = zero\nphi = constant 1")
        text = text.replace("target_residual = 1e-7", "target_residual = 1e-7\nmax_iter = 8000")
        cfg = write_config(tmp_path, text)
        rc = cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 2
        report = json.loads((tmp_path / "out" / "solve_report.json").read_text())
        assert not report["solver"]["converged"]

    def test_stability_command_phi_entry(self, tmp_path, capsys):
        cfg = write_config(tmp_path, SMALL_SOLVE.replace("psi = constant 1", "phi = constant 1"))
        rc = cli.main(["stability", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 0
        report = json.loads((tmp_path / "out" / "stability_report.json").read_text())
        verdict = report["stability"]["tau_verdict"]
        assert verdict["verdict"] == "unstable"
        assert verdict["witnesses"][0]["invariants"] == [0, 1, 0, 0]
        assert report["stability"]["sigma_verdict"]["verdict"] == "unstable"

    def test_stability_command_with_catalog_file(self, tmp_path):
        catalog = tmp_path / "catalog.txt"
        catalog.write_text("ambient 1 1 0 0\nentry 1 0 0 0 user-supplied\n")
        text = SMALL_SOLVE + f"\n[stability]\ncatalog = {catalog}\n"
        cfg = write_config(tmp_path, text)
        rc = cli.main(["stability", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 0
        report = json.loads((tmp_path / "out" / "stability_report.json").read_text())
        assert report["stability"]["tau_verdict"]["verdict"] == "stable"

    def test_stability_command_with_user_subobjects(self, tmp_path):
        text = SMALL_SOLVE + "\n[stability]\nsubobjects = 0 1 0 0\n"
        cfg = write_config(tmp_path, text)
        rc = cli.main(["stability", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 0
        report = json.loads((tmp_path / "out" / "stability_report.json").read_text())
        provs = {e["provenance"] for e in report["stability"]["catalog"]}
        assert "user-supplied" in provs
        # the added (0, E2) invariant destabilizes the psi entry's catalog
        assert report["stability"]["tau_verdict"]["verdict"] == "unstable"

    def test_verify_hk_command(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "[grid]\nn = 32\n[bundles]\ndegrees1 = 0\ndegrees2 = 0\n[constants]\ntau = 1\n[hk]\ndraws = 5\n",
        )
        rc = cli.main(["verify-hk", "--config", str(cfg), "--out", str(tmp_path / "out"), "--seed", "1"])
        assert rc == 0

    def test_verify_reduction_command(self, tmp_path):
        text = SMALL_SOLVE + "\n[reduction]\nn_points = 40\n"
        cfg = write_config(tmp_path, text)
        rc = cli.main(["verify-reduction", "--config", str(cfg), "--out", str(tmp_path / "out"), "--seed", "3"])
        assert rc == 0
        report = json.loads((tmp_path / "out" / "verify_reduction_report.json").read_text())
        names = {c["name"] for c in report["checks"]}
        assert {"he_product_residual", "he_offdiagonal", "integrability", "fs_contraction_constant"} <= names


class TestConfigHandling:
    def test_malformed_config_exit_1(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "[constants]\nsigma = 2\ntau = 1\n")
        rc = cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 1
        assert "constants" in capsys.readouterr().err

    def test_missing_config_exit_1(self, tmp_path):
        rc = cli.main(["solve", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)])
        assert rc == 1

    def test_bad_field_spec_names_key(self, tmp_path):
        cfg = write_config(tmp_path, SMALL_SOLVE.replace("psi = constant 1", "psi = constant what"))
        with pytest.raises(ConfigError, match="complex"):
            parse_config(cfg).quadruplet()

    def test_shipped_configs_parse(self):
        for name in (
            "solve_psi_stable.ini",
            "stability_phi_unstable.ini",
            "verify_reduction_psi.ini",
            "verify_hk.ini",
        ):
            cfg = parse_config(CONFIGS / name)
            assert cfg.constants() is not None


class TestReports:
    def test_report_round_trip(self):
        from fractions import Fraction

        rep = Report(
            command="solve",
            seed=7,
            constants={"tau": Fraction(1, 3), "lambda_he": -2j * 3.14},
            provenance={"config_sha256": "x", "package_version": "0", "numpy_version": "0"},
        )
        rep.checks.append(make_check("a", 1e-9, 1e-8))
        rep.solver = {"converged": True, "iterations": 3, "final_sup_r1": 0.0,
                      "final_sup_r2": 0.0, "message": "converged", "history_csv": "h.csv"}
        back = Report.from_json(rep.to_json())
        assert back.to_dict() == rep.to_dict()
        assert back.constants["tau"] == Fraction(1, 3)

    def test_csv_determinism(self, tmp_path):
        cfg = write_config(tmp_path, SMALL_SOLVE)
        for run in ("a", "b"):
            rc = cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / run), "--seed", "5"])
            assert rc == 0
        assert (tmp_path / "a" / "history.csv").read_bytes() == (tmp_path / "b" / "history.csv").read_bytes()
