import runpy
from pathlib import Path

import pytest

from src.core.models import ConfigError
from src.io.config import load_config

CHECKER = Path(__file__).resolve().parent.parent / "scripts" / "check_env.py"


def _checker():
    return runpy.run_path(str(CHECKER))


def test_env_checker_unset_is_ok():
    mod = _checker()
    assert mod["validate_value"]("HGV_THREADS", None) == 0
    assert mod["validate_environment"]({}) == 0


def test_env_checker_not_integer():
    mod = _checker()
    assert mod["validate_value"]("HGV_SEED", "abc") == 1


def test_env_checker_out_of_range():
    mod = _checker()
    assert mod["validate_value"]("HGV_THREADS", "0") == 2
    assert mod["validate_environment"]({"HGV_SIM_MAX_QUBITS": "99", "HGV_SEED": "x"}) == 2


def test_load_config_reads_overrides(monkeypatch):
    monkeypatch.setenv("HGV_SIM_MAX_QUBITS", "8")
    monkeypatch.setenv("HGV_THREADS", "3")
    monkeypatch.setenv("HGV_SEED", "42")
    monkeypatch.delenv("HGV_ORACLE_MAX_QUBITS", raising=False)
    cfg = load_config()
    assert cfg.limits.sim_max_qubits == 8
    assert cfg.limits.oracle_max_qubits == 12
    assert cfg.threads == 3
    assert cfg.seed == 42


def test_load_config_rejects_garbage(monkeypatch):
    monkeypatch.setenv("HGV_THREADS", "many")
    with pytest.raises(ConfigError):
        load_config()
