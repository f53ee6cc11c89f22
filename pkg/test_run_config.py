#!/usr/bin/env python3
"""
Tests for run configurations, presets and the report store
"""
import json
import logging

import numpy as np
import pytest
import yaml

from src.report_store import REPORT_VERSION, ReportStore, dumps, normalize
from src.run_config import (
    Backend,
    Command,
    ModelKind,
    RandomSpec,
    RunConfig,
    RunConfigManager,
    TorusSpec,
    configure_logging,
    run_config_from_dict,
)


@pytest.fixture
def manager():
    return RunConfigManager()


@pytest.fixture
def store(tmp_path):
    return ReportStore(str(tmp_path / "reports"))


def sample_report(passed=True):
    return {
        "version": REPORT_VERSION,
        "command": "torsion",
        "config": {"name": "torsion-hand"},
        "results": {"rho": complex(-2 / 3, 0)},
        "suites": [{"name": "identity", "passed": passed, "residual": 1e-15, "tolerance": 1e-9}],
        "passed": passed,
    }


class TestRunConfig:
    def test_random_spec_needs_seed(self):
        with pytest.raises(ValueError):
            RandomSpec()

    def test_random_spec_ranks(self):
        with pytest.raises(ValueError):
            RandomSpec(n0=2, n1=2, r0=2, r1=1, seed=1)

    def test_unitary_needs_square(self):
        with pytest.raises(ValueError):
            RandomSpec(n0=3, n1=2, r0=1, r1=0, seed=1, unitary=True)

    def test_model_needs_its_spec(self):
        with pytest.raises(ValueError):
            RunConfig("x", Command.TORUS, ModelKind.TORUS)

    def test_one_model_source(self):
        with pytest.raises(ValueError):
            RunConfig("x", Command.TORSION, ModelKind.RANDOM, random=RandomSpec(seed=1), path="a.cx")

    def test_negative_cut(self):
        with pytest.raises(ValueError):
            RunConfig("x", Command.TORSION, ModelKind.HAND, cuts=[-1.0])

    def test_torus_spec_parses_complex_pairs(self):
        cfg = TorusSpec(K=0, a=[[0.3, 0.1], 0.2, 0.0], h=[0.5, -0.2]).to_config()
        assert cfg.a[0] == 0.3 + 0.1j
        assert cfg.h == 0.5 - 0.2j

    def test_dict_round_trip(self, manager):
        config = manager.get_configuration("torus-generic")
        again = run_config_from_dict(config.to_dict())
        assert again.to_dict() == config.to_dict()

    def test_missing_field(self):
        with pytest.raises(ValueError):
            run_config_from_dict({"model": "hand"})


class TestRunConfigManager:
    def test_every_command_has_a_preset(self, manager):
        commands = {item["command"] for item in manager.list_configurations()}
        assert commands == {command.value for command in Command}

    def test_unknown_preset(self, manager):
        assert manager.get_configuration("nope") is None
        with pytest.raises(ValueError):
            manager.create_custom_configuration("nope", {})

    def test_custom_overrides(self, manager):
        config = manager.create_custom_configuration("verify-quick", {"count": 3, "backend": "exact"})
        assert config.count == 3
        assert config.backend == Backend.EXACT

    def test_yaml_file_with_preset(self, manager, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump({"preset": "torsion-hand", "cuts": [0.0, 5.0]}))
        config = manager.load_file(str(path))
        assert config.model == ModelKind.HAND
        assert config.cuts == [0.0, 5.0]

    def test_json_file(self, manager, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"command": "torus", "model": "torus", "torus": {"K": 0, "h": 1.0}}))
        config = manager.load_file(str(path))
        assert config.torus.to_config().K == 0

    def test_missing_file(self, manager, tmp_path):
        with pytest.raises(ValueError):
            manager.load_file(str(tmp_path / "missing.yaml"))

    def test_non_mapping_file(self, manager, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValueError):
            manager.load_file(str(path))

    def test_logging_level_from_environment(self, monkeypatch):
        monkeypatch.setenv("TORSIONLAB_LOG", "debug")
        configure_logging()
        assert logging.getLogger().level == logging.DEBUG
        configure_logging("warning")
        assert logging.getLogger().level == logging.WARNING


class TestReportStore:
    def test_normalize(self):
        data = normalize({"z": 1 / 3 + 2j, "n": np.int64(4), "x": np.float64(0.1), "t": (1, 2)})
        assert data == {"z": [0.333333333333, 2.0], "n": 4, "x": 0.1, "t": [1, 2]}

    def test_normalize_rejects_objects(self):
        with pytest.raises(TypeError):
            normalize(object())

    def test_dumps_is_stable(self):
        assert dumps(sample_report()) == dumps(sample_report())

    def test_save_get_delete(self, store):
        path = store.save_report("torsion-hand", sample_report())
        assert path.exists()
        assert store.list_reports() == ["torsion-hand"]
        assert store.get_report("torsion-hand")["results"]["rho"] == [-0.666666666667, 0.0]
        assert store.delete_report("torsion-hand")
        assert store.get_report("torsion-hand") is None
        assert not store.delete_report("torsion-hand")

    def test_validate_good_report(self, store):
        result = store.validate_report(normalize(sample_report()))
        assert result["valid"]
        assert result["errors"] == []

    def test_validate_flags_problems(self, store):
        report = sample_report()
        report["passed"] = False
        report["version"] = "0.1"
        del report["results"]
        result = store.validate_report(report)
        assert not result["valid"]
        assert "Missing required field: results" in result["errors"]
        assert "Top-level passed flag disagrees with the suite table" in result["errors"]
        assert result["warnings"]
