"""Dense statevector kernel for hypergraph states.

Conventions:
 - bit i of an amplitude index is qubit i
 - X-basis outcomes are reported as bits via |+> -> 0, |-> -> 1
 - mixed states are stochastic ensembles of pure states; DensityMatrix is
   an exact oracle for small n only
 - every rng is an explicit numpy Generator, never a global
"""

from __future__ import annotations
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
import math

import numpy as np

from ..core import metrics as _metrics
from ..core.hypergraph import Hypergraph
from ..core.limits import LIMITS
from ..core.models import NoiseModelError, SizeLimitError, WorkbenchError

INV_SQRT2 = 1.0 / math.sqrt(2.0)
NORM_TOL = 1e-10


def _mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << int(v)
    return m


@lru_cache(maxsize=32)
def _indices(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def _check_size(n: int, limit: Optional[int], what: str) -> None:
    cap = LIMITS.sim_max_qubits if limit is None else limit
    if n > cap:
        raise SizeLimitError(f"{what} limited to {cap} qubits, got {n}")


# ---- Data Structures ---- #

@dataclass(frozen=True)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.amplitudes.shape != (1 << self.n,):
            raise WorkbenchError(f"expected {1 << self.n} amplitudes, got {self.amplitudes.shape}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self) -> bool:
        return abs(self.norm - 1.0) < NORM_TOL

    def dump(self, tol: float = 1e-15) -> List[Tuple[str, float, float]]:
        """Debug dump as (bitstring, re, im); bitstring lists qubit 0 first."""
        rows = []
        for x, amp in enumerate(self.amplitudes):
            if abs(amp) <= tol:
                continue
            bits = "".join(str((x >> q) & 1) for q in range(self.n))
            rows.append((bits, float(amp.real), float(amp.imag)))
        return rows

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "StateVector":
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[index] = 1.0
        return cls(n, amps)

    @classmethod
    def plus(cls, n: int) -> "StateVector":
        dim = 1 << n
        return cls(n, np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128))


@dataclass(frozen=True)
class PhasePolynomial:
    """f(x) = sum over monomials of prod_{i in e} x_i (mod 2)."""
    n: int
    monomials: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_hypergraph(cls, h: Hypergraph) -> "PhasePolynomial":
        return cls(h.n, h.edges)

    def evaluate(self, x: int) -> int:
        total = 0
        for e in self.monomials:
            m = _mask(e)
            total ^= int((x & m) == m)
        return total

    def parities(self) -> np.ndarray:
        idx = _indices(self.n)
        parity = np.zeros(idx.shape, dtype=bool)
        for e in self.monomials:
            m = _mask(e)
            parity ^= (idx & m) == m
        return parity

    def amplitudes(self) -> np.ndarray:
        dim = 1 << self.n
        signs = np.where(self.parities(), -1.0, 1.0)
        return (signs / math.sqrt(dim)).astype(np.complex128)


@dataclass(frozen=True)
class NoiseModel:
    z_flip: float = 0.0
    x_flip: float = 0.0
    depolarizing: float = 0.0
    z_distribution: Optional[Mapping[str, float]] = None  # bitstring (qubit 0 first) -> P(x)

    def __post_init__(self) -> None:
        for name in ("z_flip", "x_flip", "depolarizing"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise NoiseModelError(f"{name} must lie in [0, 1], got {p}")
        if self.z_distribution is not None:
            if any(v < 0 for v in self.z_distribution.values()):
                raise NoiseModelError("negative probability in explicit distribution")
            if abs(sum(self.z_distribution.values()) - 1.0) > 1e-12:
                raise NoiseModelError("explicit distribution must sum to 1")
            if any(set(k) - {"0", "1"} for k in self.z_distribution):
                raise NoiseModelError("explicit distribution keys must be bitstrings")

    @property
    def is_trivial(self) -> bool:
        if self.z_flip or self.x_flip or self.depolarizing:
            return False
        if self.z_distribution is None:
            return True
        return all(p == 0.0 or set(k) <= {"0"} for k, p in self.z_distribution.items())

    @property
    def z_only(self) -> bool:
        return self.x_flip == 0.0 and self.depolarizing == 0.0

    def support(self, n: int) -> List[Tuple[int, float]]:
        """Explicit distribution as (z mask, probability); point mass on 0 when absent."""
        if self.z_distribution is None:
            return [(0, 1.0)]
        out = []
        for bits, p in sorted(self.z_distribution.items()):
            if len(bits) != n:
                raise NoiseModelError(f"bitstring {bits!r} does not match {n} qubits")
            if p > 0:
                out.append((_mask(q for q, b in enumerate(bits) if b == "1"), p))
        return out


BasisAssignment = str  # per qubit 'X' or 'Z'


def basis_for_class(n: int, x_vertices: Iterable[int]) -> BasisAssignment:
    xs = set(x_vertices)
    return "".join("X" if q in xs else "Z" for q in range(n))


# ---- Construction & gates ---- #

def build_state(h: Hypergraph, max_qubits: Optional[int] = None) -> StateVector:
    _check_size(h.n, max_qubits, "state construction")
    _metrics.inc_states_built()
    return StateVector(h.n, PhasePolynomial.from_hypergraph(h).amplitudes())


def apply_generalized_cz(state: StateVector, e: Sequence[int]) -> StateVector:
    if not e:
        raise WorkbenchError("generalized CZ needs at least one vertex")
    for v in e:
        if v < 0 or v >= state.n:
            raise WorkbenchError(f"vertex {v} out of range for {state.n} qubits")
    m = _mask(e)
    idx = _indices(state.n)
    amps = np.where((idx & m) == m, -state.amplitudes, state.amplitudes)
    return StateVector(state.n, amps)


def _z_signs(n: int, z_mask: int) -> np.ndarray:
    idx = _indices(n)
    parity = np.zeros(idx.shape, dtype=np.int64)
    q = 0
    while z_mask >> q:
        if (z_mask >> q) & 1:
            parity ^= (idx >> q) & 1
        q += 1
    return 1.0 - 2.0 * parity


def apply_masks(amps: np.ndarray, n: int, x_mask: int, z_mask: int) -> np.ndarray:
    """X^x Z^z applied along axis 0 (vectors or column stacks)."""
    out = amps
    if z_mask:
        signs = _z_signs(n, z_mask)
        out = out * (signs if out.ndim == 1 else signs[:, None])
    if x_mask:
        out = out[_indices(n) ^ x_mask]
    return out


def pauli_masks(pauli: str, n: int) -> Tuple[int, int]:
    if len(pauli) != n:
        raise WorkbenchError(f"pauli string {pauli!r} must have {n} letters")
    x_mask = z_mask = 0
    for q, ch in enumerate(pauli.upper()):
        if ch == "X":
            x_mask |= 1 << q
        elif ch == "Z":
            z_mask |= 1 << q
        elif ch != "I":
            raise WorkbenchError(f"unsupported pauli letter {ch!r}")
    return x_mask, z_mask


def apply_pauli(state: StateVector, pauli: str) -> StateVector:
    x_mask, z_mask = pauli_masks(pauli, state.n)
    return StateVector(state.n, apply_masks(state.amplitudes, state.n, x_mask, z_mask))


def z_error_state(state: StateVector, qubits: Iterable[int]) -> StateVector:
    return StateVector(state.n, apply_masks(state.amplitudes, state.n, 0, _mask(qubits)))


# ---- Stabilizers ---- #

@lru_cache(maxsize=256)
def _stabilizer_arrays(n: int, vertex: int, factors: Tuple[Tuple[int, ...], ...]) -> Tuple[np.ndarray, np.ndarray]:
    idx = _indices(n)
    signs = np.ones(idx.shape, dtype=np.float64)
    for f in factors:
        m = _mask(f)
        signs = np.where((idx & m) == m, -signs, signs)
    perm = idx ^ (1 << vertex)
    signs.setflags(write=False)
    return signs, perm


@dataclass(frozen=True)
class StabilizerOp:
    """g_i = X_i * prod_{e containing i} CZ_{e minus i}."""
    n: int
    vertex: int
    factors: Tuple[Tuple[int, ...], ...]

    def apply_array(self, arr: np.ndarray) -> np.ndarray:
        signs, perm = _stabilizer_arrays(self.n, self.vertex, self.factors)
        return (arr * (signs if arr.ndim == 1 else signs[:, None]))[perm]

    def __call__(self, state: StateVector) -> StateVector:
        return StateVector(self.n, self.apply_array(state.amplitudes))

    def dense(self) -> np.ndarray:
        return self.apply_array(np.eye(1 << self.n, dtype=np.complex128))


def stabilizer_g(h: Hypergraph, i: int) -> StabilizerOp:
    if i < 0 or i >= h.n:
        raise WorkbenchError(f"vertex {i} out of range")
    factors = tuple(tuple(v for v in e if v != i) for e in h.incident(i))
    return StabilizerOp(h.n, i, factors)


# ---- Mixed states ---- #

@dataclass(frozen=True)
class DensityMatrix:
    n: int
    matrix: np.ndarray

    @classmethod
    def from_state(cls, state: StateVector, max_qubits: Optional[int] = None) -> "DensityMatrix":
        _check_size(state.n, LIMITS.density_max_qubits if max_qubits is None else max_qubits, "density oracle")
        a = state.amplitudes
        return cls(state.n, np.outer(a, a.conj()))

    @classmethod
    def maximally_mixed(cls, n: int, max_qubits: Optional[int] = None) -> "DensityMatrix":
        _check_size(n, LIMITS.density_max_qubits if max_qubits is None else max_qubits, "density oracle")
        dim = 1 << n
        return cls(n, np.eye(dim, dtype=np.complex128) / dim)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def expectation(self, op: StabilizerOp) -> float:
        return float(np.trace(op.apply_array(self.matrix)).real)


def _conjugate(rho: np.ndarray, n: int, x_mask: int, z_mask: int) -> np.ndarray:
    left = apply_masks(rho, n, x_mask, z_mask)
    return apply_masks(left.conj().T, n, x_mask, z_mask).conj().T


def noisy_density(h: Hypergraph, noise: NoiseModel, max_qubits: Optional[int] = None) -> DensityMatrix:
    """Exact noise-averaged density operator (Pauli channels commute)."""
    rho = DensityMatrix.from_state(build_state(h), max_qubits).matrix
    n = h.n
    for q in range(n):
        bit = 1 << q
        if noise.z_flip:
            rho = (1 - noise.z_flip) * rho + noise.z_flip * _conjugate(rho, n, 0, bit)
        if noise.x_flip:
            rho = (1 - noise.x_flip) * rho + noise.x_flip * _conjugate(rho, n, bit, 0)
        if noise.depolarizing:
            p = noise.depolarizing
            mixed = _conjugate(rho, n, bit, 0) + _conjugate(rho, n, bit, bit) + _conjugate(rho, n, 0, bit)
            rho = (1 - p) * rho + (p / 3.0) * mixed
    if noise.z_distribution is not None:
        rho = sum(p * _conjugate(rho, n, 0, z) for z, p in noise.support(n))
    return DensityMatrix(n, rho)


@dataclass(frozen=True)
class Ensemble:
    members: Tuple[StateVector, ...]
    weights: Tuple[float, ...] = field(default=())

    def normalized_weights(self) -> np.ndarray:
        if not self.weights:
            return np.full(len(self.members), 1.0 / len(self.members))
        w = np.asarray(self.weights, dtype=np.float64)
        return w / w.sum()


AnyState = Union[StateVector, DensityMatrix, Ensemble]


def expectation_g(state: AnyState, h: Hypergraph, i: int) -> float:
    op = stabilizer_g(h, i)
    if isinstance(state, StateVector):
        return float(np.vdot(state.amplitudes, op.apply_array(state.amplitudes)).real)
    if isinstance(state, DensityMatrix):
        return state.expectation(op)
    w = state.normalized_weights()
    return float(sum(wk * expectation_g(m, h, i) for wk, m in zip(w, state.members)))


def fidelity(a: StateVector, b: StateVector) -> float:
    if a.n != b.n:
        raise WorkbenchError(f"dimension mismatch: {a.n} vs {b.n} qubits")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def density_fidelity(target: StateVector, rho: DensityMatrix) -> float:
    a = target.amplitudes
    return float(np.vdot(a, rho.matrix @ a).real)


# ---- Measurement ---- #

def _rotate_to_x(amps: np.ndarray, n: int, x_qubits: Sequence[int]) -> np.ndarray:
    out = np.array(amps, dtype=np.complex128, copy=True)
    for q in x_qubits:
        t = out.reshape(1 << (n - 1 - q), 2, 1 << q)
        a0 = t[:, 0, :].copy()
        a1 = t[:, 1, :]
        t[:, 0, :] = (a0 + a1) * INV_SQRT2
        t[:, 1, :] = (a0 - a1) * INV_SQRT2
    return out


def outcome_distribution(state: StateVector, basis: BasisAssignment) -> np.ndarray:
    if len(basis) != state.n or set(basis.upper()) - {"X", "Z"}:
        raise WorkbenchError(f"basis {basis!r} must assign X or Z to all {state.n} qubits")
    x_qubits = [q for q, b in enumerate(basis.upper()) if b == "X"]
    probs = np.abs(_rotate_to_x(state.amplitudes, state.n, x_qubits)) ** 2
    return probs / probs.sum()


def sample_outcomes(state: StateVector, basis: BasisAssignment, rng: np.random.Generator, shots: int) -> np.ndarray:
    """shots x n array of outcome bits; the input state is left untouched."""
    probs = outcome_distribution(state, basis)
    picks = rng.choice(probs.shape[0], size=shots, p=probs)
    return ((picks[:, None] >> np.arange(state.n)) & 1).astype(np.uint8)


def measure(state: StateVector, basis: BasisAssignment, rng: np.random.Generator) -> np.ndarray:
    return sample_outcomes(state, basis, rng, 1)[0]


# ---- Noise sampling ---- #

def draw_error_masks(noise: NoiseModel, n: int, rng: np.random.Generator) -> Tuple[int, int]:
    x_mask = z_mask = 0
    if noise.z_distribution is not None:
        support = noise.support(n)
        probs = np.array([p for _, p in support])
        z_mask ^= support[int(rng.choice(len(support), p=probs / probs.sum()))][0]
    for q in range(n):
        bit = 1 << q
        if noise.z_flip and rng.random() < noise.z_flip:
            z_mask ^= bit
        if noise.x_flip and rng.random() < noise.x_flip:
            x_mask ^= bit
        if noise.depolarizing and rng.random() < noise.depolarizing:
            kind = int(rng.integers(3))  # 0: X, 1: Y, 2: Z
            if kind in (0, 1):
                x_mask ^= bit
            if kind in (1, 2):
                z_mask ^= bit
    return x_mask, z_mask


def sample_noisy_state(h: Hypergraph, noise: NoiseModel, rng: np.random.Generator,
                       base: Optional[StateVector] = None) -> StateVector:
    ideal = base if base is not None else build_state(h)
    if noise.is_trivial:
        return ideal
    x_mask, z_mask = draw_error_masks(noise, h.n, rng)
    return StateVector(h.n, apply_masks(ideal.amplitudes, h.n, x_mask, z_mask))


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


def superposition(states: Sequence[StateVector], coeffs: Optional[Sequence[complex]] = None) -> StateVector:
    if not states:
        raise WorkbenchError("superposition needs at least one state")
    c = list(coeffs) if coeffs is not None else [1.0] * len(states)
    amps = sum(ck * s.amplitudes for ck, s in zip(c, states))
    norm = np.linalg.norm(amps)
    if norm < NORM_TOL:
        raise WorkbenchError("superposition vanishes")
    return StateVector(states[0].n, amps / norm)


def as_dict_dump(state: StateVector) -> Dict[str, object]:
    return {"n": state.n, "amplitudes": [list(r) for r in state.dump()]}
