#!/usr/bin/env python3
"""
Tests for the command-line interface
"""
import json

import pytest
from click.testing import CliRunner

from cli import cli, parse_cuts, resolve_config
from src.run_config import Command, ThetaPolicy


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


class TestResolveConfig:
    def test_default_preset(self):
        assert resolve_config(Command.TORSION).name == "torsion-hand"

    def test_overrides(self):
        config = resolve_config(Command.TORSION, preset="torsion-random", seed=9, cuts="0,2.5",
                                theta="-0.3", backend="exact")
        assert config.random.seed == 9
        assert config.cuts == [0.0, 2.5]
        assert config.theta == ThetaPolicy.EXPLICIT
        assert config.theta_value == -0.3
        assert config.backend.value == "exact"

    def test_seed_needs_random_model(self):
        with pytest.raises(ValueError):
            resolve_config(Command.TORSION, seed=3)

    def test_preset_for_another_command(self):
        with pytest.raises(ValueError):
            resolve_config(Command.TORSION, preset="torus-generic")

    def test_bad_cuts(self):
        with pytest.raises(ValueError):
            parse_cuts("1,x")


class TestRunCommands:
    def test_torsion_writes_report(self, runner, tmp_path):
        out = tmp_path / "hand.json"
        result = runner.invoke(cli, ["torsion", "--lambda", "0,5", "--out", str(out)])
        assert result.exit_code == 0
        assert "✓ torsion passed" in result.output
        report = json.loads(out.read_text())
        assert report["passed"]
        assert report["command"] == "torsion"

    def test_report_store_default(self, runner, tmp_path):
        reports = tmp_path / "reports"
        result = runner.invoke(cli, ["torsion", "--reports-dir", str(reports)])
        assert result.exit_code == 0
        assert (reports / "torsion-torsion-hand.json").exists()
        listing = runner.invoke(cli, ["report", "list", "--reports-dir", str(reports)])
        assert "torsion-torsion-hand" in listing.output

    def test_numerical_ambiguity_exit_code(self, runner, tmp_path):
        result = runner.invoke(cli, ["torsion", "--lambda", "4", "--reports-dir", str(tmp_path)])
        assert result.exit_code == 2
        assert "Error:" in result.stderr

    def test_unknown_preset(self, runner, tmp_path):
        result = runner.invoke(cli, ["torus", "--preset", "nope", "--reports-dir", str(tmp_path)])
        assert result.exit_code == 1
        assert "not found" in result.stderr

    def test_torus_from_config_file(self, runner, tmp_path):
        config = tmp_path / "torus.json"
        config.write_text(json.dumps({
            "command": "torus", "model": "torus", "torus": {"K": 0, "a": [0.31, 0.17, 0.23], "h": 0.5},
        }))
        result = runner.invoke(cli, ["torus", "-c", str(config), "--reports-dir", str(tmp_path)])
        assert result.exit_code == 0
        assert "✓ cohomology dims match the rank oracle" in result.output

    def test_complex_file(self, runner, tmp_path):
        path = tmp_path / "one.cx"
        path.write_text("1 1 0 1\n1 1\n2\n1 1\n0\n1 1\n1\n1 1\n1\n")
        out = tmp_path / "one.json"
        result = runner.invoke(cli, ["torsion", "--complex", str(path), "--lambda", "0", "--out", str(out)])
        assert result.exit_code == 0
        report = json.loads(out.read_text())
        assert report["results"]["rho_gamma"]["coeff"] == pytest.approx([2.0, 0.0])


class TestReportCommands:
    def test_configs(self, runner):
        result = runner.invoke(cli, ["configs"])
        assert result.exit_code == 0
        assert "torsion-hand" in result.output
        assert "leak" in result.output

    def test_empty_store(self, runner, tmp_path):
        result = runner.invoke(cli, ["report", "list", "--reports-dir", str(tmp_path)])
        assert "No reports found." in result.output

    def test_validate(self, runner, tmp_path):
        out = tmp_path / "hand.json"
        runner.invoke(cli, ["torsion", "--out", str(out)])
        result = runner.invoke(cli, ["report", "validate", str(out), "--reports-dir", str(tmp_path)])
        assert result.exit_code == 0
        assert "is valid" in result.output

    def test_validate_invalid(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"version": "1.0.0"}))
        result = runner.invoke(cli, ["report", "validate", str(bad), "--reports-dir", str(tmp_path)])
        assert result.exit_code == 1
        assert "Missing required field: command" in result.output

    def test_export_pdf(self, runner, tmp_path):
        pytest.importorskip("reportlab")
        out = tmp_path / "hand.json"
        runner.invoke(cli, ["torsion", "--out", str(out)])
        pdf = tmp_path / "hand.pdf"
        result = runner.invoke(cli, ["export", str(out), "--pdf", str(pdf)])
        assert result.exit_code == 0
        assert pdf.read_bytes().startswith(b"%PDF")
