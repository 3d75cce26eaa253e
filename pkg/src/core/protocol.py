from __future__ import annotations
"""Verifier and prover models.

Two protocols are simulated:
 - the three-color case study: 6k+1 registers, three test groups of 2k
   registers, one computation register
 - the general verification: d discarded registers, one target, and one
   group per schedule slot whose per-stabilizer pass counts K_ij are compared
   with the threshold 1/2 + (1 - eps)/r

Registers never hold more than one state in memory at a time per distinct
prover output; noisy provers keep only their sampled Pauli masks.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple, TypeVar, Union
import math
import time

import numpy as np

from . import metrics as _metrics
from .hypergraph import Hypergraph, IndependenceCover, validate_cover
from .limits import LIMITS
from .models import (
    CaseStudyTranscript,
    CoverError,
    NotDeskExecutable,
    ProtocolError,
    SizeLimitError,
    TestRecord,
    VerifierTranscript,
)
from .stabilizer import (
    CorrectableSet,
    TestSlot,
    closed_form_pass_probability,
    parity_check_batch,
    slot_vertices,
    stabilizer_subspace_weight,
    test_schedule,
)
from .stats import (
    FrequencyEstimate,
    binomial_sigma,
    binomial_tail,
    completeness_bound,
    derive_seed,
    hoeffding_tail,
    make_rng,
    min_passes,
)
from ..sim.state_sim import (
    AnyState,
    NoiseModel,
    StateVector,
    apply_masks,
    basis_for_class,
    build_state,
    draw_error_masks,
    expectation_g,
    fidelity,
    sample_outcomes,
    z_error_state,
)

T = TypeVar("T")
RationalLike = Union[int, float, str, Fraction]

CASE_STUDY_FLAG = "three-test-groups-of-2k"


# ---- Parameters ---- #

@dataclass(frozen=True)
class FullScaleValues:
    """Exact full-scale values; never truncated."""
    upsilon: int
    epsilon: Fraction
    k_j: Fraction
    d_coefficient: int  # d = d_coefficient * ln 2
    d: Decimal

    def registers(self) -> Decimal:
        return Decimal(self.upsilon) * Decimal(self.k_j.numerator) / Decimal(self.k_j.denominator) + self.d + 1

    def to_dict(self) -> Dict[str, str]:
        return {
            "upsilon": str(self.upsilon),
            "epsilon": str(self.epsilon),
            "k_j": str(self.k_j),
            "d": f"{self.d_coefficient}*log(2)",
            "d_value": str(self.d),
        }


@dataclass(frozen=True)
class ProtocolParams:
    n_qubits: int
    upsilon: int
    k_per_group: Tuple[int, ...]
    d: int = 0
    epsilon: float = 0.0
    r: float = 2.0
    gamma: Optional[int] = None
    mode: str = "desk"
    threshold_override: Optional[float] = None
    exact: Optional[FullScaleValues] = None

    def __post_init__(self) -> None:
        if self.mode not in ("desk", "paper"):
            raise ProtocolError(f"unknown parameter mode {self.mode!r}")
        if self.mode == "paper":
            return
        if self.upsilon < 1:
            raise ProtocolError("upsilon must be >= 1")
        if len(self.k_per_group) != self.upsilon or any(k < 1 for k in self.k_per_group):
            raise ProtocolError("one k_j >= 1 per group required")
        if self.d < 0 or self.n_qubits < 1:
            raise ProtocolError("d must be >= 0 and N >= 1")
        if not 0.0 <= self.epsilon < 1.0 or self.r <= 0:
            raise ProtocolError("epsilon must lie in [0, 1) and r must be positive")

    @property
    def threshold(self) -> float:
        if self.threshold_override is not None:
            return self.threshold_override
        return 0.5 + (1.0 - self.epsilon) / self.r

    @property
    def register_count(self) -> int:
        return sum(self.k_per_group) + self.d + 1

    def with_k(self, k: int) -> "ProtocolParams":
        return replace(self, k_per_group=(k,) * self.upsilon)

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["k_per_group"] = list(self.k_per_group)
        d["threshold"] = self.threshold
        d["exact"] = self.exact.to_dict() if self.exact else None
        return d


def _ln2(digits: int = 50) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = digits
        return Decimal(2).ln()


def _rational(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ProtocolError(f"r must be a finite rational, got {value!r}") from exc


def derive_paper_params(n_qubits: int, gamma: int, r: RationalLike, k: int) -> ProtocolParams:
    """upsilon = gamma(gamma-1)/2, eps = 1/N^3, k_j = N^7 r^2 / 2, d = 2 N^7 upsilon^7 k^2 log 2.

    r is taken as an exact rational (2.5 -> 5/2), never rounded.
    """
    if n_qubits < 1 or gamma < 2:
        raise ProtocolError("full-scale parameters need N >= 1 and gamma >= 2")
    r_exact = _rational(r)
    if r_exact <= 0 or k < 1:
        raise ProtocolError("full-scale parameters need r > 0 and k >= 1")
    upsilon = gamma * (gamma - 1) // 2
    epsilon = Fraction(1, n_qubits ** 3)
    k_j = n_qubits ** 7 * r_exact ** 2 / 2
    coefficient = 2 * n_qubits ** 7 * upsilon ** 7 * k ** 2
    with localcontext() as ctx:
        ctx.prec = 50
        d_value = Decimal(coefficient) * _ln2()
    exact = FullScaleValues(upsilon, epsilon, k_j, coefficient, d_value)
    return ProtocolParams(
        n_qubits=n_qubits,
        upsilon=upsilon,
        k_per_group=(math.ceil(k_j),) * upsilon,
        d=math.ceil(d_value),
        epsilon=float(epsilon),
        r=float(r_exact),
        gamma=gamma,
        mode="paper",
        exact=exact,
    )


def desk_params(n_qubits: int, upsilon: int, k: int | Sequence[int], d: int = 0, epsilon: float = 0.0,
                r: float = 2.0, threshold: Optional[float] = None, gamma: Optional[int] = None) -> ProtocolParams:
    ks = tuple(k) if isinstance(k, (list, tuple)) else (int(k),) * upsilon  # type: ignore[arg-type]
    return ProtocolParams(n_qubits, upsilon, ks, d, epsilon, r, gamma, "desk", threshold)


def full_scale_counts(params: ProtocolParams) -> Dict[str, str]:
    if params.exact is None:
        return {"registers": str(params.register_count), "qubits": str(params.register_count * params.n_qubits)}
    registers = params.exact.registers()
    counts = params.exact.to_dict()
    counts["registers"] = str(registers)
    counts["qubits"] = str(registers * params.n_qubits)
    return counts


# ---- Provers ---- #

@dataclass(frozen=True)
class ProverModel:
    variant: str = "honest"  # honest | iid-noisy | single-bad-copy | fixed-state
    noise: Optional[NoiseModel] = None
    state: Optional[StateVector] = None  # bad copy or fixed state
    label: str = ""

    def __post_init__(self) -> None:
        if self.variant not in ("honest", "iid-noisy", "single-bad-copy", "fixed-state"):
            raise ProtocolError(f"unknown prover variant {self.variant!r}")
        if self.variant == "iid-noisy" and self.noise is None:
            raise ProtocolError("iid-noisy prover needs a noise model")
        if self.variant == "fixed-state" and self.state is None:
            raise ProtocolError("fixed-state prover needs a state")

    @classmethod
    def honest(cls) -> "ProverModel":
        return cls("honest")

    @classmethod
    def iid_noisy(cls, noise: NoiseModel) -> "ProverModel":
        return cls("iid-noisy", noise=noise)

    @classmethod
    def single_bad_copy(cls, bad_state: Optional[StateVector] = None) -> "ProverModel":
        return cls("single-bad-copy", state=bad_state)

    @classmethod
    def fixed_state(cls, state: StateVector, label: str = "") -> "ProverModel":
        return cls("fixed-state", state=state, label=label)

    def describe(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"variant": self.variant}
        if self.noise is not None:
            out["noise"] = asdict(self.noise)
        if self.label:
            out["label"] = self.label
        return out


BAD_REGISTER = 0


def default_bad_state(h: Hypergraph, cover: IndependenceCover) -> StateVector:
    """Z on the first vertex of every class: fails every class test."""
    reps = sorted({cls_[0] for cls_ in cover.classes})
    return z_error_state(build_state(h), reps)


class _RegisterSource:
    """What the prover put in each register, materialized on demand."""

    def __init__(self, h: Hypergraph, cover: IndependenceCover, prover: ProverModel, total: int,
                 rng: np.random.Generator) -> None:
        self.h = h
        self.prover = prover
        self.ideal = build_state(h)
        self._masks: List[Tuple[int, int]] = []
        if prover.variant == "iid-noisy":
            assert prover.noise is not None
            self._masks = [draw_error_masks(prover.noise, h.n, rng) for _ in range(total)]
        self._bad: Optional[StateVector] = None
        if prover.variant == "single-bad-copy":
            self._bad = prover.state if prover.state is not None else default_bad_state(h, cover)
        if prover.state is not None and prover.state.n != h.n:
            raise ProtocolError(f"prover state has {prover.state.n} qubits, register holds {h.n}")
        self._cache: Dict[Hashable, StateVector] = {}

    def key(self, reg: int) -> Hashable:
        if self.prover.variant == "iid-noisy":
            return self._masks[reg]
        if self.prover.variant == "single-bad-copy":
            return "bad" if reg == BAD_REGISTER else "ideal"
        if self.prover.variant == "fixed-state":
            return "fixed"
        return "ideal"

    def state(self, reg: int) -> StateVector:
        key = self.key(reg)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if key == "bad":
            assert self._bad is not None
            st = self._bad
        elif key == "fixed":
            assert self.prover.state is not None
            st = self.prover.state
        elif isinstance(key, tuple) and key != (0, 0):
            st = StateVector(self.h.n, apply_masks(self.ideal.amplitudes, self.h.n, key[0], key[1]))
        else:
            st = self.ideal
        if len(self._cache) > 64:
            self._cache.clear()
        self._cache[key] = st
        return st


def _test_registers(source: _RegisterSource, regs: Sequence[int], h: Hypergraph, vertices: Tuple[int, ...],
                    S: CorrectableSet, rng: np.random.Generator) -> Dict[int, Tuple[bool, str, str]]:
    """Run one class test per register; registers holding the same state are sampled together."""
    by_key: Dict[Hashable, List[int]] = {}
    for reg in regs:
        by_key.setdefault(source.key(reg), []).append(reg)
    basis = basis_for_class(h.n, vertices)
    results: Dict[int, Tuple[bool, str, str]] = {}
    passes = 0
    for members in by_key.values():
        outcomes = sample_outcomes(source.state(members[0]), basis, rng, len(members))
        syndromes = parity_check_batch(h, vertices, outcomes)
        passed = S.contains_batch(syndromes)
        for row, reg in enumerate(members):
            results[reg] = (
                bool(passed[row]),
                "".join(str(int(b)) for b in syndromes[row]),
                "".join(str(int(b)) for b in outcomes[row]),
            )
        passes += int(passed.sum())
    _metrics.inc_color_tests(len(regs), passes)
    return results


def _require_valid(h: Hypergraph, cover: IndependenceCover) -> None:
    check = validate_cover(h, cover)
    if not check.ok:
        raise CoverError(f"invalid cover: {check.reason}")


def _projection(state: StateVector, ideal: StateVector, h: Hypergraph, vertices: Sequence[int]) -> Optional[float]:
    # all stabilizers checked: the joint +1 eigenspace is spanned by |H>
    if len(set(vertices)) == h.n:
        return fidelity(ideal, state)
    if h.n > LIMITS.oracle_max_qubits:
        return None
    return stabilizer_subspace_weight(state, h, sorted(set(vertices)))


# ---- Case study ---- #

def run_case_study(h: Hypergraph, cover: IndependenceCover, k: int, prover: ProverModel,
                   S: Optional[CorrectableSet] = None, rng: Optional[np.random.Generator] = None,
                   seed: int = 0) -> CaseStudyTranscript:
    """6k+1 registers; group l runs the test of class l in alternating configurations."""
    if cover.m != 3:
        raise CoverError(f"case study needs a 3-class cover, got {cover.m} classes")
    _require_valid(h, cover)
    if k < 1:
        raise ProtocolError("k must be >= 1")
    S = S or CorrectableSet.zero()
    rng = rng if rng is not None else make_rng(seed)
    total = 6 * k + 1
    perm = [int(v) for v in rng.permutation(total)]
    # draw order inside a group decides the configuration
    groups = [perm[l * 2 * k:(l + 1) * 2 * k] for l in range(3)]
    computation = perm[6 * k]
    source = _RegisterSource(h, cover, prover, total, rng)

    records: List[TestRecord] = []
    for l, regs in enumerate(groups):
        for config in ("primary", "dual"):
            slot = TestSlot(l, config)
            members = regs[0::2] if config == "primary" else regs[1::2]
            vertices = slot_vertices(cover, slot)
            basis = basis_for_class(h.n, vertices)
            results = _test_registers(source, members, h, vertices, S, rng)
            for reg in members:
                passed, syndrome, outcomes = results[reg]
                records.append(TestRecord(reg, l, slot.x_class(cover.m), config, passed, syndrome, basis, outcomes))
    records.sort(key=lambda rec: (rec.group, rec.register))

    target = source.state(computation)
    bad = BAD_REGISTER if prover.variant == "single-bad-copy" else None
    tr = CaseStudyTranscript(
        seed=seed,
        k=k,
        groups=groups,
        computation_register=computation,
        records=records,
        bad_register=bad,
        bad_escaped=bad is not None and computation == bad,
        target_fidelity=fidelity(source.ideal, target),
        target_projection=_projection(target, source.ideal, h, range(h.n)),
        flags=[CASE_STUDY_FLAG],
    )
    tr.decision = tr.recompute_decision()
    _metrics.record_decision(tr.decision)
    return tr


# ---- Verification ---- #

def group_slots(cover: IndependenceCover, upsilon: int) -> List[TestSlot]:
    schedule = test_schedule(cover)
    return [schedule[j % len(schedule)] for j in range(upsilon)]


def honest_pass_probability(h: Hypergraph, cover: IndependenceCover, S: CorrectableSet,
                            slots: Sequence[TestSlot]) -> float:
    return min(closed_form_pass_probability(NoiseModel(), h.n, slot_vertices(cover, s), S) for s in slots)


def run_verification(h: Hypergraph, cover: IndependenceCover, params: ProtocolParams, prover: ProverModel,
                     S: Optional[CorrectableSet] = None, rng: Optional[np.random.Generator] = None,
                     seed: int = 0, max_registers: Optional[int] = None) -> VerifierTranscript:
    if params.mode == "paper":
        raise NotDeskExecutable("full-scale parameters are not desk-executable", full_scale_counts(params))
    _require_valid(h, cover)
    if params.n_qubits != h.n:
        raise ProtocolError(f"params say N={params.n_qubits}, hypergraph has {h.n} vertices")
    cap = LIMITS.max_registers if max_registers is None else max_registers
    total = params.register_count
    if total > cap:
        raise SizeLimitError(f"{total} registers exceed the limit of {cap}")
    S = S or CorrectableSet.zero()
    rng = rng if rng is not None else make_rng(seed)

    perm = [int(v) for v in rng.permutation(total)]
    discarded = sorted(perm[:params.d])
    target_reg = perm[params.d]
    rest = perm[params.d + 1:]
    groups: List[List[int]] = []
    start = 0
    for k_j in params.k_per_group:
        groups.append(sorted(rest[start:start + k_j]))
        start += k_j
    slots = group_slots(cover, params.upsilon)
    source = _RegisterSource(h, cover, prover, total, rng)

    records: List[TestRecord] = []
    group_vertices: List[List[int]] = []
    for j, regs in enumerate(groups):
        slot = slots[j]
        vertices = slot_vertices(cover, slot)
        group_vertices.append(list(vertices))
        basis = basis_for_class(h.n, vertices)
        results = _test_registers(source, regs, h, vertices, S, rng)
        for reg in regs:
            passed, syndrome, outcomes = results[reg]
            records.append(TestRecord(reg, j, slot.x_class(cover.m), slot.config, passed, syndrome, basis, outcomes))

    checked = sorted({s.x_class(cover.m) for s in slots})
    checked_vertices = [v for c in checked for v in cover.classes[c]]
    target = source.state(target_reg)
    tr = VerifierTranscript(
        seed=seed,
        n_qubits=h.n,
        params=params.to_dict(),
        discarded=discarded,
        target_register=target_reg,
        groups=groups,
        group_classes=[s.x_class(cover.m) for s in slots],
        group_vertices=group_vertices,
        k_per_group=list(params.k_per_group),
        threshold=params.threshold,
        records=records,
        target_fidelity=fidelity(source.ideal, target),
        honest_pass_probability=honest_pass_probability(h, cover, S, slots),
        target_projection=_projection(target, source.ideal, h, checked_vertices),
        checked_classes=checked,
    )
    tr.counters = tr.recount()
    tr.decision = tr.recompute_decision()
    _metrics.record_decision(tr.decision)
    return tr


# ---- Trials ---- #

def run_trials(fn: Callable[[int, np.random.Generator, int], T], trials: int, master_seed: int,
               threads: int = 1) -> List[T]:
    """fn(index, rng, seed) per trial; results come back in index order."""
    if trials < 0:
        raise ProtocolError("trials must be >= 0")

    def one(index: int) -> T:
        seed = derive_seed(master_seed, index)
        return fn(index, make_rng(seed), seed)

    if threads <= 1:
        return [one(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(trials)))


def stabilizer_pass_probabilities(state: AnyState, h: Hypergraph, cover: IndependenceCover,
                                  params: ProtocolParams) -> List[List[float]]:
    """(1 + <g_i>)/2 for every stabilizer each group counts."""
    out = []
    for slot in group_slots(cover, params.upsilon):
        out.append([(1.0 + expectation_g(state, h, i)) / 2.0 for i in slot_vertices(cover, slot)])
    return out


def expected_acceptance(pass_probabilities: Sequence[Sequence[float]], k_per_group: Sequence[int],
                        threshold: float) -> float:
    """Binomial-tail acceptance for i.i.d. registers.

    Exact when each group counts a single stabilizer; with several stabilizers
    per group their counts are treated as independent.
    """
    value = 1.0
    for probs, k in zip(pass_probabilities, k_per_group):
        need = min_passes(k, threshold)
        for p in probs:
            value *= binomial_tail(k, min(1.0, max(0.0, p)), need)
    return value


# ---- Experiments ---- #

def _mean(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if len(values) else None


def acceptance_summary(decisions: Sequence[bool]) -> FrequencyEstimate:
    if not decisions:
        raise ProtocolError("no runs to summarize")
    return FrequencyEstimate.from_counts(sum(1 for d in decisions if d), len(decisions))


@dataclass
class DetectabilityReport:
    k: int
    alpha: float
    trials: int
    acceptance: FrequencyEstimate
    trace_bound: float
    fidelity_bound: float
    joint_bad: FrequencyEstimate  # accept and projection below trace_bound
    conditional_projection: Optional[float]
    conditional_fidelity: Optional[float]
    joint_ok: bool
    conditional_ok: Optional[bool]  # None when acceptance < alpha
    transcripts: List[CaseStudyTranscript] = field(default_factory=list, repr=False)

    @property
    def satisfied(self) -> bool:
        return self.joint_ok and self.conditional_ok is not False

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d.pop("transcripts")
        d["acceptance"] = self.acceptance.to_dict()
        d["joint_bad"] = self.joint_bad.to_dict()
        d["satisfied"] = self.satisfied
        return d


def detectability_check(prover: ProverModel, h: Hypergraph, cover: IndependenceCover, k: int, alpha: float,
                        trials: int, master_seed: int = 0, S: Optional[CorrectableSet] = None,
                        threads: int = 1, keep_transcripts: bool = False) -> DetectabilityReport:
    blocks = 6 * k + 1
    if alpha < 1.0 / blocks or alpha > 1.0:
        raise ProtocolError(f"alpha must lie in [1/{blocks}, 1], got {alpha}")
    if trials < 1:
        raise ProtocolError("trials must be >= 1")
    started = time.perf_counter()
    runs = run_trials(lambda i, rng, seed: run_case_study(h, cover, k, prover, S, rng, seed),
                      trials, master_seed, threads)
    trace_bound = 1.0 - 1.0 / (alpha * blocks)
    fidelity_bound = 1.0 / math.sqrt(alpha * blocks)
    accepted = [t for t in runs if t.decision]
    projections = [t.target_projection if t.target_projection is not None else t.target_fidelity for t in accepted]
    joint = sum(1 for p in projections if p < trace_bound)
    acceptance = acceptance_summary([t.decision for t in runs])
    joint_est = FrequencyEstimate.from_counts(joint, trials)
    cond_proj = _mean(projections)
    cond_fid = _mean([t.target_fidelity for t in accepted])
    joint_ok = joint_est.estimate <= alpha + 3.0 * binomial_sigma(min(alpha, 1.0), trials)
    conditional_ok: Optional[bool] = None
    if acceptance.estimate >= alpha and cond_proj is not None:
        conditional_ok = cond_proj >= trace_bound - 3.0 * math.sqrt(1.0 / len(accepted))
    _metrics.record_experiment("detectability", (time.perf_counter() - started) * 1000.0)
    return DetectabilityReport(k, alpha, trials, acceptance, trace_bound, fidelity_bound, joint_est,
                               cond_proj, cond_fid, joint_ok, conditional_ok, runs if keep_transcripts else [])


@dataclass
class CompletenessReport:
    params: Dict[str, Any]
    trials: int
    acceptance: FrequencyEstimate
    tail: float
    bound: float
    honest_pass_probability: float
    margin: float  # honest pass probability minus threshold
    satisfied: bool
    transcripts: List[VerifierTranscript] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d.pop("transcripts")
        d["acceptance"] = self.acceptance.to_dict()
        return d


def _tail_for(params: ProtocolParams) -> Tuple[float, float]:
    k_min = min(params.k_per_group)
    if params.epsilon <= 0.0:
        return 1.0, 1.0 - params.upsilon * params.n_qubits
    tail = hoeffding_tail(params.epsilon, params.r, k_min)
    return tail, completeness_bound(params.upsilon, params.n_qubits, params.epsilon, params.r, k_min)


def completeness_experiment(h: Hypergraph, cover: IndependenceCover, params: ProtocolParams, trials: int,
                            master_seed: int = 0, S: Optional[CorrectableSet] = None,
                            threads: int = 1, keep_transcripts: bool = False) -> CompletenessReport:
    if params.mode == "paper":
        raise NotDeskExecutable("full-scale parameters are not desk-executable", full_scale_counts(params))
    if trials < 1:
        raise ProtocolError("trials must be >= 1")
    S = S or CorrectableSet.zero()
    started = time.perf_counter()
    prover = ProverModel.honest()
    runs = run_trials(lambda i, rng, seed: run_verification(h, cover, params, prover, S, rng, seed),
                      trials, master_seed, threads)
    acceptance = acceptance_summary([t.decision for t in runs])
    tail, bound = _tail_for(params)
    honest = honest_pass_probability(h, cover, S, group_slots(cover, params.upsilon))
    clipped = min(1.0, max(0.0, bound))
    satisfied = acceptance.estimate >= bound - 3.0 * binomial_sigma(clipped, trials)
    _metrics.record_experiment("completeness", (time.perf_counter() - started) * 1000.0)
    return CompletenessReport(params.to_dict(), trials, acceptance, tail, bound, honest,
                              honest - params.threshold, satisfied, runs if keep_transcripts else [])


def full_scale_completeness_bound(n_qubits: int, gamma: int, r: RationalLike, k: int) -> float:
    """1 - upsilon N e^{-2 eps^2 k_j / r^2} at full-scale parameters (report only)."""
    params = derive_paper_params(n_qubits, gamma, r, k)
    assert params.exact is not None
    exponent = 2 * params.exact.epsilon ** 2 * params.exact.k_j / _rational(r) ** 2
    return 1.0 - params.upsilon * n_qubits * math.exp(-float(exponent))


@dataclass
class SoundnessRow:
    k: int
    acceptance: FrequencyEstimate
    joint_bad: FrequencyEstimate  # accept and target fidelity < 1 - delta
    conditional_fidelity: Optional[float]
    expected_acceptance: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "acceptance": self.acceptance.to_dict(),
            "joint_bad": self.joint_bad.to_dict(),
            "conditional_fidelity": self.conditional_fidelity,
            "expected_acceptance": self.expected_acceptance,
        }


@dataclass
class SoundnessReport:
    delta: float
    trials: int
    rows: List[SoundnessRow]
    fidelity_bound: Fraction  # 1 - 1/(N upsilon)
    delta_prime: Optional[float]  # 1 - smallest conditional fidelity seen
    transcripts: List[VerifierTranscript] = field(default_factory=list, repr=False)

    @property
    def monotone(self) -> bool:
        freqs = [row.joint_bad.estimate for row in self.rows]
        return all(b <= a for a, b in zip(freqs, freqs[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "trials": self.trials,
            "rows": [row.to_dict() for row in self.rows],
            "fidelity_bound": str(self.fidelity_bound),
            "fidelity_bound_value": float(self.fidelity_bound),
            "delta_prime": self.delta_prime,
            "monotone": self.monotone,
        }


def soundness_bound(n_qubits: int, upsilon: int) -> Fraction:
    return 1 - Fraction(1, n_qubits * upsilon)


def soundness_experiment(h: Hypergraph, cover: IndependenceCover, params: ProtocolParams, delta: float,
                         trials: int, master_seed: int = 0, prover: Optional[ProverModel] = None,
                         k_values: Sequence[int] = (4, 16, 64), S: Optional[CorrectableSet] = None,
                         threads: int = 1, keep_transcripts: bool = False) -> SoundnessReport:
    """Joint frequency of (accept and bad target) across growing k_j."""
    if params.mode == "paper":
        raise NotDeskExecutable("full-scale parameters are not desk-executable", full_scale_counts(params))
    if not 0.0 <= delta <= 1.0:
        raise ProtocolError(f"delta must lie in [0, 1], got {delta}")
    S = S or CorrectableSet.zero()
    prover = prover or ProverModel.honest()
    started = time.perf_counter()
    rows: List[SoundnessRow] = []
    cond_values: List[float] = []
    kept: List[VerifierTranscript] = []
    for idx, k in enumerate(k_values):
        p = params.with_k(k)
        # disjoint seed streams per k
        stream = derive_seed(master_seed, 1_000_000 + idx)
        runs = run_trials(lambda i, rng, seed: run_verification(h, cover, p, prover, S, rng, seed),
                          trials, stream, threads)
        if keep_transcripts:
            kept.extend(runs)
        accepted = [t for t in runs if t.decision]
        joint = sum(1 for t in accepted if t.target_fidelity < 1.0 - delta)
        cond = _mean([t.target_fidelity for t in accepted])
        if cond is not None:
            cond_values.append(cond)
        expected = None
        if prover.variant in ("honest", "fixed-state") and S.mode == "zero":
            state = prover.state if prover.state is not None else build_state(h)
            expected = expected_acceptance(stabilizer_pass_probabilities(state, h, cover, p), p.k_per_group, p.threshold)
        rows.append(SoundnessRow(k, acceptance_summary([t.decision for t in runs]),
                                 FrequencyEstimate.from_counts(joint, trials), cond, expected))
    _metrics.record_experiment("soundness", (time.perf_counter() - started) * 1000.0)
    delta_prime = 1.0 - min(cond_values) if cond_values else None
    return SoundnessReport(delta, trials, rows, soundness_bound(params.n_qubits, params.upsilon), delta_prime, kept)

