from __future__ import annotations
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

# ---- Data Structures ---- #

@dataclass
class TestRecord:
    """One destructive class test on one register."""
    register: int
    group: int
    x_class: int  # index of the class measured in X
    config: str  # primary | dual
    passed: bool
    syndrome: str  # one bit per vertex of the X class, class order
    basis: str  # per qubit X|Z
    outcomes: str  # per qubit 0|1

    __test__ = False  # not a pytest class

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class VerifierTranscript:
    seed: int
    n_qubits: int
    params: Dict[str, Any]
    discarded: List[int]
    target_register: int
    groups: List[List[int]]  # group j -> register indices
    group_classes: List[int]  # group j -> X class index
    group_vertices: List[List[int]]  # group j -> vertices whose stabilizers are counted
    k_per_group: List[int]
    threshold: float
    records: List[TestRecord] = field(default_factory=list)
    counters: Dict[str, int] = field(default_factory=dict)  # "j:i" -> K_ij
    decision: bool = False
    target_fidelity: float = 0.0
    honest_pass_probability: float = 1.0
    target_projection: Optional[float] = None  # weight on the checked-stabilizer subspace
    checked_classes: List[int] = field(default_factory=list)

    def recount(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for j, verts in enumerate(self.group_vertices):
            for i in verts:
                counts[f"{j}:{i}"] = 0
        for rec in self.records:
            verts = self.group_vertices[rec.group]
            for pos, i in enumerate(verts):
                if rec.syndrome[pos] == "0":
                    counts[f"{rec.group}:{i}"] += 1
        return counts

    def recompute_decision(self) -> bool:
        counts = self.recount()
        for key, value in counts.items():
            j = int(key.split(":", 1)[0])
            if value / self.k_per_group[j] < self.threshold:
                return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["kind"] = "verification"
        return d


@dataclass
class CaseStudyTranscript:
    seed: int
    k: int
    groups: List[List[int]]  # three test groups, 2k registers each
    computation_register: int
    records: List[TestRecord] = field(default_factory=list)
    decision: bool = False
    bad_register: Optional[int] = None
    bad_escaped: bool = False
    target_fidelity: float = 0.0
    target_projection: Optional[float] = None
    flags: List[str] = field(default_factory=list)

    def recompute_decision(self) -> bool:
        return all(r.passed for r in self.records)

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["kind"] = "case-study"
        return d


# ---- Exceptions ---- #

class WorkbenchError(Exception):
    pass

class HypergraphParseError(WorkbenchError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line

class HypergraphError(WorkbenchError):
    pass

class SizeLimitError(WorkbenchError):
    pass

class CoverError(WorkbenchError):
    pass

class NoiseModelError(WorkbenchError):
    pass

class StatsInputError(WorkbenchError):
    pass

class ProtocolError(WorkbenchError):
    pass

class NotDeskExecutable(ProtocolError):
    def __init__(self, message: str, counts: Dict[str, Any]) -> None:
        super().__init__(message)
        self.counts = counts

class ConfigError(WorkbenchError):
    pass

class InvariantViolation(WorkbenchError):
    pass
