from __future__ import annotations
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..core.limits import LIMITS, Limits
from ..core.models import ConfigError

_dotenv_loaded_flag = False

def _ensure_dotenv_loaded() -> None:
    global _dotenv_loaded_flag
    if _dotenv_loaded_flag:
        return
    try:
        from dotenv import load_dotenv  # type: ignore
        load_dotenv()  # lädt .env falls vorhanden
    except Exception:
        pass
    _dotenv_loaded_flag = True

# (variable, Limits field or None, default, minimum)
ENV_INTS = (
    ("HGV_SIM_MAX_QUBITS", "sim_max_qubits", LIMITS.sim_max_qubits, 1),
    ("HGV_ORACLE_MAX_QUBITS", "oracle_max_qubits", LIMITS.oracle_max_qubits, 1),
    ("HGV_DENSITY_MAX_QUBITS", "density_max_qubits", LIMITS.density_max_qubits, 1),
    ("HGV_COLOR_VERTEX_LIMIT", "color_vertex_limit", LIMITS.color_vertex_limit, 1),
    ("HGV_MAX_REGISTERS", "max_registers", LIMITS.max_registers, 1),
    ("HGV_THREADS", None, 1, 1),
    ("HGV_SEED", None, 0, 0),
)

@dataclass
class AppConfig:
    limits: Limits = field(default_factory=Limits)
    threads: int = 1
    seed: int = 0
    log_dir: Path = Path("logs")


def _read_int(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def load_config(log_dir: Optional[str] = None) -> AppConfig:
    _ensure_dotenv_loaded()
    values = {name: _read_int(name, default, minimum) for name, _, default, minimum in ENV_INTS}
    limits = Limits(**{attr: values[name] for name, attr, _, _ in ENV_INTS if attr})
    return AppConfig(
        limits=limits,
        threads=values["HGV_THREADS"],
        seed=values["HGV_SEED"],
        log_dir=Path(log_dir or os.getenv("HGV_LOG_DIR", "logs")),
    )
