"""Static size limits of the workbench.

Decisions:
 - Dense simulator: up to 24 qubits (2**24 complex amplitudes, ~256 MB)
 - Exact projector oracle (analytic pass probabilities): up to 12 qubits
 - Dense density-operator oracle: up to 10 qubits (4**10 entries)
 - Exact chromatic number: up to 20 vertices (backtracking)
 - Protocol runs: at most 200k registers per transcript

Environment overrides are read in src/io/config.py.
"""

from __future__ import annotations
from dataclasses import dataclass


@dataclass(frozen=True)
class Limits:
    sim_max_qubits: int = 24
    oracle_max_qubits: int = 12
    density_max_qubits: int = 10
    color_vertex_limit: int = 20
    max_registers: int = 200_000


LIMITS = Limits()
