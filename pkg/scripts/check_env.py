#!/usr/bin/env python
from __future__ import annotations
"""Validiert die HGV_* Umgebungsvariablen der Workbench.

Exit Codes:
 0 = OK (nicht gesetzte Variablen nutzen Defaults)
 1 = Wert ist keine ganze Zahl
 2 = Wert außerhalb des erlaubten Bereichs

Verwendung:
  python scripts/check_env.py
"""
import os
import sys
from pathlib import Path
from typing import Mapping, Optional

try:
    from dotenv import load_dotenv  # type: ignore
except Exception:  # pragma: no cover
    load_dotenv = None  # type: ignore

# name -> (minimum, maximum or None)
RANGES = {
    "HGV_SIM_MAX_QUBITS": (1, 30),
    "HGV_ORACLE_MAX_QUBITS": (1, 16),
    "HGV_DENSITY_MAX_QUBITS": (1, 13),
    "HGV_COLOR_VERTEX_LIMIT": (1, 64),
    "HGV_MAX_REGISTERS": (1, None),
    "HGV_THREADS": (1, 256),
    "HGV_SEED": (0, 2**64 - 1),
}


def load_env() -> None:
    if load_dotenv:
        env_file = Path(__file__).resolve().parent.parent / ".env"
        if env_file.exists():
            load_dotenv(dotenv_path=env_file)  # type: ignore


def validate_value(name: str, value: Optional[str]) -> int:
    if value is None or value.strip() == "":
        return 0
    try:
        number = int(value)
    except ValueError:
        print(f"[ENV] {name}={value!r} ist keine ganze Zahl.")
        return 1
    low, high = RANGES[name]
    if number < low or (high is not None and number > high):
        bound = f"{low}..{high}" if high is not None else f">= {low}"
        print(f"[ENV] {name}={number} außerhalb von {bound}.")
        return 2
    return 0


def validate_environment(env: Mapping[str, str]) -> int:
    worst = 0
    for name in RANGES:
        worst = max(worst, validate_value(name, env.get(name)))
    if worst == 0:
        print("[ENV] HGV_* Variablen OK.")
    return worst


def main() -> int:
    load_env()
    result = validate_environment(os.environ)
    if result == 0:
        print("Environment: OK")
    else:
        print("Environment: PROBLEM (Code", result, ")")
    return result


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
