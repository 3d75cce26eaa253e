from __future__ import annotations
"""Color-class stabilizer tests.

A test binds one class A_l to the X basis and its complement to Z. For each
i in A_l the syndrome bit is

    s_i = b_i XOR sum_{e containing i} prod_{j in e minus i} z_j   (mod 2)

and s_i = 0 exactly when the measured eigenvalue of g_i is +1. The test
passes when the syndrome lies in the correctable set S.

Analytic probabilities split the state with the commuting projectors
(I +- g_i)/2 one vertex at a time, dropping branches whose weight is below
PRUNE_TOL and branches no syndrome of S can extend.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats as _sps

from . import metrics as _metrics
from .hypergraph import Hypergraph, IndependenceCover, require_proper_class, validate_cover
from .limits import LIMITS
from .models import CoverError, SizeLimitError, WorkbenchError
from ..sim.state_sim import (
    DensityMatrix,
    Ensemble,
    NoiseModel,
    StateVector,
    basis_for_class,
    build_state,
    draw_error_masks,
    apply_masks,
    measure,
    noisy_density,
    sample_outcomes,
    stabilizer_g,
)

PRUNE_TOL = 1e-15
CONFIGS = ("primary", "dual")

AnalyticState = Union[StateVector, DensityMatrix, Ensemble]


# ---- Data Structures ---- #

@dataclass(frozen=True)
class Syndrome:
    class_index: int
    vertices: Tuple[int, ...]
    bits: Tuple[int, ...]

    @property
    def weight(self) -> int:
        return sum(self.bits)

    @property
    def is_zero(self) -> bool:
        return not any(self.bits)

    def key(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class CorrectableSet:
    """Acceptable syndromes: exact zero, weight <= t, or an explicit list.

    Listed syndromes are bitstrings in class order; the all-zero syndrome is
    always accepted.
    """
    mode: str = "zero"
    t: int = 0
    syndromes: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.mode not in ("zero", "weight", "list"):
            raise WorkbenchError(f"unknown correctable-set mode {self.mode!r}")
        if self.t < 0:
            raise WorkbenchError("weight threshold must be >= 0")
        for s in self.syndromes:
            if not s or set(s) - {"0", "1"}:
                raise WorkbenchError(f"listed syndrome {s!r} is not a bitstring")

    @classmethod
    def zero(cls) -> "CorrectableSet":
        return cls("zero")

    @classmethod
    def weight(cls, t: int) -> "CorrectableSet":
        return cls("weight", t=t)

    @classmethod
    def listed(cls, syndromes: Iterable[str]) -> "CorrectableSet":
        return cls("list", syndromes=frozenset(syndromes))

    def contains(self, bits: Sequence[int]) -> bool:
        w = sum(int(b) for b in bits)
        if w == 0:
            return True
        if self.mode == "weight":
            return w <= self.t
        if self.mode == "list":
            return "".join(str(int(b)) for b in bits) in self.syndromes
        return False

    def contains_batch(self, bits: np.ndarray) -> np.ndarray:
        weights = bits.sum(axis=1)
        if self.mode == "weight":
            return weights <= self.t
        if self.mode == "list":
            keys = ["".join(map(str, row)) for row in bits.astype(np.uint8)]
            listed = np.array([k in self.syndromes for k in keys], dtype=bool)
            return (weights == 0) | listed
        return weights == 0

    def admits_prefix(self, prefix: str) -> bool:
        ones = prefix.count("1")
        if ones == 0:
            return True
        if self.mode == "weight":
            return ones <= self.t
        if self.mode == "list":
            return any(s.startswith(prefix) for s in self.syndromes)
        return False

    def enumerate(self, length: int) -> List[str]:
        """Accepted syndromes of the given length (list and zero modes)."""
        if self.mode == "weight":
            raise WorkbenchError("weight sets are not enumerated")
        out = {"0" * length}
        out.update(s for s in self.syndromes if len(s) == length)
        return sorted(out)

    def to_dict(self) -> Dict[str, Any]:
        if self.mode == "weight":
            return {"mode": "weight", "t": self.t}
        if self.mode == "list":
            return {"mode": "list", "syndromes": sorted(self.syndromes)}
        return {"mode": "zero"}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CorrectableSet":
        mode = data.get("mode", "zero")
        if mode == "weight":
            return cls.weight(int(data["t"]))
        if mode == "list":
            return cls.listed(str(s) for s in data.get("syndromes", []))
        return cls(mode)


@dataclass(frozen=True)
class TestSlot:
    """One basis configuration: X on the class of `x_class`, Z elsewhere."""
    class_index: int
    config: str = "primary"

    __test__ = False

    def x_class(self, m: int) -> int:
        return self.class_index if self.config == "primary" else (self.class_index + 1) % m

    def label(self) -> str:
        return f"{self.class_index}/{self.config}"


@dataclass(frozen=True)
class TestOutcome:
    passed: bool
    syndrome: Syndrome
    basis: str
    outcomes: Tuple[int, ...]

    __test__ = False

    def outcome_str(self) -> str:
        return "".join(str(b) for b in self.outcomes)


def test_schedule(cover: IndependenceCover) -> List[TestSlot]:
    """Primary configuration of every class, then every dual."""
    return [TestSlot(l, cfg) for cfg in CONFIGS for l in range(cover.m)]


test_schedule.__test__ = False  # type: ignore[attr-defined]


def slot_vertices(cover: IndependenceCover, slot: TestSlot) -> Tuple[int, ...]:
    return cover.classes[slot.x_class(cover.m)]


# ---- Parity checks ---- #

@lru_cache(maxsize=512)
def _check_terms(h: Hypergraph, vertices: Tuple[int, ...]) -> Tuple[Tuple[int, Tuple[Tuple[int, ...], ...]], ...]:
    require_proper_class(h, vertices)
    return tuple((i, tuple(tuple(v for v in e if v != i) for e in h.incident(i))) for i in vertices)


def parity_check(h: Hypergraph, vertices: Sequence[int], outcomes: Sequence[int], class_index: int = 0) -> Syndrome:
    if len(outcomes) != h.n:
        raise WorkbenchError(f"expected {h.n} outcome bits, got {len(outcomes)}")
    bits = []
    for i, factors in _check_terms(h, tuple(vertices)):
        s = int(outcomes[i]) & 1
        for rest in factors:
            s ^= int(all(int(outcomes[j]) & 1 for j in rest))
        bits.append(s)
    return Syndrome(class_index, tuple(vertices), tuple(bits))


def parity_check_batch(h: Hypergraph, vertices: Sequence[int], outcomes: np.ndarray) -> np.ndarray:
    """shots x |A_l| syndrome bits for a shots x n outcome array."""
    terms = _check_terms(h, tuple(vertices))
    out = np.zeros((outcomes.shape[0], len(terms)), dtype=np.uint8)
    for col, (i, factors) in enumerate(terms):
        s = outcomes[:, i].astype(np.uint8) & 1
        for rest in factors:
            s ^= np.all(outcomes[:, list(rest)] == 1, axis=1).astype(np.uint8)
        out[:, col] = s
    return out


# ---- Sampled tests ---- #

def _require_cover(h: Hypergraph, cover: IndependenceCover, l: int) -> None:
    check = validate_cover(h, cover)
    if not check.ok:
        raise CoverError(f"invalid cover: {check.reason}")
    if l < 0 or l >= cover.m:
        raise CoverError(f"class index {l} out of range 0..{cover.m - 1}")


def color_test(state: StateVector, h: Hypergraph, vertices: Sequence[int], S: CorrectableSet,
               rng: np.random.Generator, class_index: int = 0) -> TestOutcome:
    """Single destructive test; the caller guarantees the class is proper."""
    basis = basis_for_class(h.n, vertices)
    bits = measure(state, basis, rng)
    syndrome = parity_check(h, vertices, bits, class_index)
    passed = S.contains(syndrome.bits)
    _metrics.inc_color_tests(1, int(passed))
    return TestOutcome(passed, syndrome, basis, tuple(int(b) for b in bits))


def run_color_test(state: StateVector, h: Hypergraph, cover: IndependenceCover, l: int, S: CorrectableSet,
                   rng: np.random.Generator, config: str = "primary") -> TestOutcome:
    _require_cover(h, cover, l)
    slot = TestSlot(l, config)
    return color_test(state, h, slot_vertices(cover, slot), S, rng, slot.x_class(cover.m))


@dataclass
class BatchResult:
    vertices: Tuple[int, ...]
    basis: str
    outcomes: np.ndarray  # shots x n
    syndromes: np.ndarray  # shots x |A_l|
    passed: np.ndarray  # shots

    @property
    def pass_count(self) -> int:
        return int(self.passed.sum())


def run_color_tests(state: StateVector, h: Hypergraph, cover: IndependenceCover, l: int, S: CorrectableSet,
                    rng: np.random.Generator, shots: int, config: str = "primary") -> BatchResult:
    """Many independent copies of the same test at once."""
    _require_cover(h, cover, l)
    vertices = slot_vertices(cover, TestSlot(l, config))
    basis = basis_for_class(h.n, vertices)
    outcomes = sample_outcomes(state, basis, rng, shots)
    syndromes = parity_check_batch(h, vertices, outcomes)
    passed = S.contains_batch(syndromes)
    _metrics.inc_color_tests(shots, int(passed.sum()))
    return BatchResult(tuple(vertices), basis, outcomes, syndromes, passed)


def run_single_stabilizer_test(state: StateVector, h: Hypergraph, i: int, rng: np.random.Generator) -> int:
    """X on i, Z on the rest; only i and its neighbours enter the check."""
    if i < 0 or i >= h.n:
        raise WorkbenchError(f"vertex {i} out of range")
    bits = measure(state, basis_for_class(h.n, [i]), rng)
    return 1 if parity_check(h, [i], bits).bits[0] == 0 else -1


# ---- Projector oracle ---- #

def _weight_fn(arr: np.ndarray) -> float:
    if arr.ndim == 1:
        return float(np.vdot(arr, arr).real)
    return float(np.trace(arr).real)


def _split(arr: np.ndarray, ops: list, pos: int, prefix: str, admit: Callable[[str], bool],
           out: Dict[str, float]) -> None:
    if pos == len(ops):
        out[prefix] = _weight_fn(arr)
        return
    g_arr = ops[pos].apply_array(arr)
    for bit, sign in ((0, 1.0), (1, -1.0)):
        key = prefix + str(bit)
        if not admit(key):
            continue
        part = 0.5 * (arr + sign * g_arr)
        if _weight_fn(part) < PRUNE_TOL:
            continue
        _split(part, ops, pos + 1, key, admit, out)


def _distribution(state: AnalyticState, h: Hypergraph, vertices: Sequence[int],
                  admit: Callable[[str], bool], max_qubits: Optional[int]) -> Dict[str, float]:
    if isinstance(state, Ensemble):
        total: Dict[str, float] = {}
        for w, member in zip(state.normalized_weights(), state.members):
            for key, p in _distribution(member, h, vertices, admit, max_qubits).items():
                total[key] = total.get(key, 0.0) + float(w) * p
        return total
    cap = LIMITS.oracle_max_qubits if max_qubits is None else max_qubits
    if state.n > cap:
        raise SizeLimitError(f"projector oracle limited to {cap} qubits, got {state.n}")
    if state.n != h.n:
        raise WorkbenchError(f"state has {state.n} qubits, hypergraph {h.n}")
    arr = state.amplitudes if isinstance(state, StateVector) else state.matrix
    ops = [stabilizer_g(h, i) for i in vertices]
    out: Dict[str, float] = {}
    _split(arr, ops, 0, "", admit, out)
    return out


def syndrome_distribution(state: AnalyticState, h: Hypergraph, vertices: Sequence[int],
                          max_qubits: Optional[int] = None) -> Dict[str, float]:
    """Exact P(s) = Tr(rho Pi_s) for every syndrome of non-negligible weight."""
    require_proper_class(h, vertices)
    return _distribution(state, h, vertices, lambda _p: True, max_qubits)


def analytic_pass_probability(state: AnalyticState, h: Hypergraph, cover: IndependenceCover, l: int,
                              S: CorrectableSet, config: str = "primary",
                              max_qubits: Optional[int] = None) -> float:
    _require_cover(h, cover, l)
    vertices = slot_vertices(cover, TestSlot(l, config))
    dist = _distribution(state, h, vertices, S.admits_prefix, max_qubits)
    total = sum(p for key, p in dist.items() if S.contains([int(c) for c in key]))
    return float(min(1.0, max(0.0, total)))


def stabilizer_subspace_weight(state: AnalyticState, h: Hypergraph, vertices: Optional[Sequence[int]] = None,
                               max_qubits: Optional[int] = None) -> float:
    """Tr(rho prod_i (I + g_i)/2) over the given (default: all) vertices."""
    verts = list(range(h.n)) if vertices is None else list(vertices)
    dist = _distribution(state, h, verts, lambda p: "1" not in p, max_qubits)
    return float(dist.get("0" * len(verts), 0.0))


# ---- Acceptability ---- #

@dataclass(frozen=True)
class AcceptabilityFactor:
    slot: TestSlot
    probability: float
    method: str  # closed-form | density | monte-carlo


def _flip_pmf(size: int, p: float) -> np.ndarray:
    return _sps.binom.pmf(np.arange(size + 1), size, p)


def closed_form_pass_probability(noise: NoiseModel, n: int, vertices: Sequence[int], S: CorrectableSet) -> float:
    """Pass probability of Z-type noise on |H>, at any n."""
    if not noise.z_only:
        raise WorkbenchError("closed form only covers Z-type noise")
    # Z^x|H> is an eigenstate of every g_i with eigenvalue (-1)^{x_i}
    a = len(vertices)
    p = noise.z_flip
    total = 0.0
    for z_mask, weight in noise.support(n):
        base = [(z_mask >> v) & 1 for v in vertices]
        if S.mode == "weight":
            ones = sum(base)
            # ones that stay set, plus zeros that flip
            dist = np.convolve(_flip_pmf(ones, 1.0 - p), _flip_pmf(a - ones, p))
            total += weight * float(dist[: S.t + 1].sum())
            continue
        for key in S.enumerate(a):
            d = sum(int(c) != b for c, b in zip(key, base))
            total += weight * (p ** d) * ((1.0 - p) ** (a - d))
    return float(min(1.0, max(0.0, total)))


def _monte_carlo_pass(noise: NoiseModel, h: Hypergraph, vertices: Sequence[int], S: CorrectableSet,
                      samples: int, rng: np.random.Generator) -> float:
    ideal = build_state(h)
    basis = basis_for_class(h.n, vertices)
    passes = 0
    for _ in range(samples):
        x_mask, z_mask = draw_error_masks(noise, h.n, rng)
        state = StateVector(h.n, apply_masks(ideal.amplitudes, h.n, x_mask, z_mask))
        bits = sample_outcomes(state, basis, rng, 1)
        passes += int(S.contains_batch(parity_check_batch(h, vertices, bits))[0])
    return passes / samples


def acceptability_factors(noise: NoiseModel, h: Hypergraph, cover: IndependenceCover, S: CorrectableSet,
                          method: str = "auto", samples: int = 20_000, rng: Optional[np.random.Generator] = None,
                          density_max_qubits: Optional[int] = None) -> List[AcceptabilityFactor]:
    check = validate_cover(h, cover)
    if not check.ok:
        raise CoverError(f"invalid cover: {check.reason}")
    density_cap = LIMITS.density_max_qubits if density_max_qubits is None else density_max_qubits
    if method == "auto":
        if noise.z_only:
            method = "closed-form"
        elif h.n <= density_cap:
            method = "density"
        else:
            method = "monte-carlo"
    if method == "closed-form" and not noise.z_only:
        raise WorkbenchError("closed form only covers Z-type noise")
    if method not in ("closed-form", "density", "monte-carlo"):
        raise WorkbenchError(f"unknown acceptability method {method!r}")
    rho = noisy_density(h, noise, density_cap) if method == "density" else None
    rng = rng if rng is not None else np.random.default_rng(0)
    factors = []
    for slot in test_schedule(cover):
        vertices = slot_vertices(cover, slot)
        if method == "closed-form":
            p = closed_form_pass_probability(noise, h.n, vertices, S)
        elif rho is not None:
            p = analytic_pass_probability(rho, h, cover, slot.class_index, S, slot.config, max_qubits=density_cap)
        else:
            p = _monte_carlo_pass(noise, h, vertices, S, samples, rng)
        factors.append(AcceptabilityFactor(slot, p, method))
    return factors


def acceptability_probability(noise: NoiseModel, h: Hypergraph, cover: IndependenceCover, S: CorrectableSet,
                              k: int, **kwargs: Any) -> float:
    """Product over every class test (both configurations) of P_pass ** k."""
    if k < 0:
        raise WorkbenchError("k must be >= 0")
    value = 1.0
    for factor in acceptability_factors(noise, h, cover, S, **kwargs):
        value *= factor.probability ** k
    return value
