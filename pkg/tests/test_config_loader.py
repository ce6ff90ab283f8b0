#!/usr/bin/env python3
"""
Tests for the run configuration layer
"""

import json

import pytest

from config_loader import WORKERS_ENV, ConfigLoader, RunConfig
from core import DecimationPattern, DesignSpec, first_order_model


def test_defaults():
    config = RunConfig()
    assert config.solver.gamma_tol == 1e-4
    assert config.solver.regularization == 1e-6
    assert config.simulation.rect_period == 20
    assert config.simulation.baseline_taps == 31
    spec = config.design.to_spec()
    assert str(spec.pattern) == "110"
    assert (spec.h, spec.m, spec.n) == (1.0, 6, 4)


def test_missing_file_falls_back_to_defaults(tmp_path, capsys):
    config = ConfigLoader(str(tmp_path / "none.json")).load_config()
    assert config.to_dict() == RunConfig().to_dict()
    assert "not found" in capsys.readouterr().out


def test_unreadable_file_falls_back_to_defaults(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    config = ConfigLoader(str(path), verbose=False).load_config()
    assert config.to_dict() == RunConfig().to_dict()


def test_save_and_load_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    loader = ConfigLoader(str(path), verbose=False)
    config = RunConfig()
    config.search.workers = 3
    config.design.pattern = "1010"
    loader.save_config(config)
    again = ConfigLoader(str(path), verbose=False).load_config()
    assert again.search.workers == 3
    assert again.design.pattern == "1010"
    assert json.loads(path.read_text())["solver"]["grid"] == 2048


def test_partial_sections(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"solver": {"gamma_tol": 1e-3}}))
    config = ConfigLoader(str(path), verbose=False).load_config()
    assert config.solver.gamma_tol == 1e-3
    assert config.solver.grid == 2048


def test_apply_spec():
    config = RunConfig()
    spec = DesignSpec(DecimationPattern.from_string("1100"), 0.5, 4, 3, first_order_model(5.0))
    config.apply_spec(spec)
    again = config.design.to_spec()
    assert str(again.pattern) == "1100"
    assert (again.h, again.m, again.n) == (0.5, 4, 3)
    assert again.F.A[0, 0] == pytest.approx(-0.2)


def test_worker_environment_override(capsys):
    config = RunConfig()
    config.apply_environment({WORKERS_ENV: "6"})
    assert config.search.workers == 6
    config.apply_environment({WORKERS_ENV: "many"})
    assert config.search.workers == 6
    assert "Ignoring" in capsys.readouterr().out
    config.apply_environment({})
    assert config.search.workers == 6


def test_show_current_config(capsys):
    loader = ConfigLoader("unused.json", verbose=False)
    loader.config = RunConfig()
    loader.show_current_config()
    out = capsys.readouterr().out
    assert "CURRENT RUN CONFIGURATION" in out
    assert "Pattern: 110" in out
