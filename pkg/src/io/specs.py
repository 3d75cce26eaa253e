from __future__ import annotations
"""Run-configuration schema and resolution of hypergraph, cover, state,
prover and correctable-set specs into domain objects.

The schema is documented in CONFIG_SCHEMA.md. Every rejection surfaces as
ConfigError with a field path (``params.k``) or a JSON position
(``line 3 column 5``).
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple
import json

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..core.hypergraph import (
    Hypergraph,
    IndependenceCover,
    exact_coloring,
    from_generator,
    greedy_coloring,
    loads_document,
    parse_hypergraph,
    validate_cover,
)
from ..core.limits import LIMITS, Limits
from ..core.models import ConfigError, CoverError, NoiseModelError, WorkbenchError
from ..core.protocol import ProtocolParams, ProverModel, derive_paper_params, desk_params
from ..core.stabilizer import CorrectableSet
from ..sim.state_sim import (
    AnyState,
    DensityMatrix,
    NoiseModel,
    StateVector,
    build_state,
    pauli_masks,
    apply_masks,
    random_state,
    sample_outcomes,
    superposition,
    z_error_state,
)
from ..core.stats import make_rng

Experiment = Literal["case-study", "verification", "completeness", "soundness", "detectability"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HypergraphSource(_Strict):
    path: Optional[str] = None
    generator: Optional[str] = None
    n: Optional[int] = Field(default=None, ge=1)
    edges: Optional[List[List[int]]] = None

    @model_validator(mode="after")
    def _one_source(self) -> "HypergraphSource":
        given = [self.path is not None, self.generator is not None, self.n is not None]
        if sum(given) != 1:
            raise ValueError("exactly one of path, generator or n (+edges) is required")
        if self.edges is not None and self.n is None:
            raise ValueError("edges need n")
        return self


class CoverSpec(_Strict):
    method: Literal["auto", "greedy", "exact"] = "auto"
    classes: Optional[List[List[int]]] = None
    weights: Optional[List[float]] = None


class NoiseSpec(_Strict):
    z_flip: float = Field(default=0.0, ge=0.0, le=1.0)
    x_flip: float = Field(default=0.0, ge=0.0, le=1.0)
    depolarizing: float = Field(default=0.0, ge=0.0, le=1.0)
    z_distribution: Optional[Dict[str, float]] = None


class ProverSpec(_Strict):
    variant: Literal["honest", "iid-noisy", "single-bad-copy", "fixed-state"] = "honest"
    noise: Optional[NoiseSpec] = None
    state: Optional[str] = None

    @model_validator(mode="after")
    def _needs(self) -> "ProverSpec":
        if self.variant == "iid-noisy" and self.noise is None:
            raise ValueError("iid-noisy prover needs noise")
        if self.variant == "fixed-state" and self.state is None:
            raise ValueError("fixed-state prover needs state")
        return self


class CorrectableSpec(_Strict):
    mode: Literal["zero", "weight", "list"] = "zero"
    t: int = Field(default=0, ge=0)
    syndromes: List[str] = Field(default_factory=list)


class ParamsSpec(_Strict):
    mode: Literal["desk", "paper"] = "desk"
    k: int = Field(default=1, ge=1)
    upsilon: Optional[int] = Field(default=None, ge=1)
    k_per_group: Optional[List[int]] = None
    d: int = Field(default=0, ge=0)
    epsilon: float = Field(default=0.0, ge=0.0, lt=1.0)
    r: float = Field(default=2.0, gt=0.0)
    threshold: Optional[float] = Field(default=None, ge=0.0)
    gamma: Optional[int] = Field(default=None, ge=2)
    alpha: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    delta: float = Field(default=0.5, ge=0.0, le=1.0)
    k_values: List[int] = Field(default_factory=lambda: [4, 16, 64])

    @model_validator(mode="after")
    def _groups(self) -> "ParamsSpec":
        if self.k_per_group is not None:
            if any(k < 1 for k in self.k_per_group):
                raise ValueError("k_per_group entries must be >= 1")
            if self.upsilon is not None and len(self.k_per_group) != self.upsilon:
                raise ValueError("k_per_group needs one entry per group")
        if any(k < 1 for k in self.k_values):
            raise ValueError("k_values entries must be >= 1")
        return self


class OutputsSpec(_Strict):
    transcripts: Optional[str] = None
    summary: Optional[str] = None


class RunConfig(_Strict):
    experiment: Experiment
    hypergraph: HypergraphSource
    cover: CoverSpec = Field(default_factory=CoverSpec)
    params: ParamsSpec = Field(default_factory=ParamsSpec)
    prover: ProverSpec = Field(default_factory=ProverSpec)
    S: CorrectableSpec = Field(default_factory=CorrectableSpec)
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: int = Field(default=1, ge=1)
    outputs: OutputsSpec = Field(default_factory=OutputsSpec)


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err.get("loc", ())) or "<root>"
        parts.append(f"{loc}: {err.get('msg', 'invalid')}")
    return "; ".join(parts)


def parse_run_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("<root>: run configuration must be a JSON object")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from exc


def load_run_config(path: Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_run_config(text)


def run_config_schema() -> Dict[str, object]:
    return RunConfig.model_json_schema()


# ---- Resolution ---- #

def load_hypergraph_source(source: str, base_dir: Optional[Path] = None) -> Tuple[Hypergraph, Optional[IndependenceCover]]:
    """A file (edge list or JSON document) or a generator spec such as 'union-jack:2'."""
    path = Path(source)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    if path.is_file():
        text = path.read_text(encoding="utf-8")
        if text.lstrip().startswith("{"):
            return loads_document(text)
        return parse_hypergraph(text), None
    if ":" in source or source == "triangle":
        return from_generator(source)
    raise ConfigError(f"{source!r} is neither a file nor a generator spec")


def resolve_hypergraph(spec: HypergraphSource, base_dir: Optional[Path] = None) -> Tuple[Hypergraph, Optional[IndependenceCover]]:
    if spec.path is not None:
        return load_hypergraph_source(spec.path, base_dir)
    if spec.generator is not None:
        return from_generator(spec.generator)
    assert spec.n is not None
    return Hypergraph.from_edges(spec.n, spec.edges or []), None


def resolve_cover(h: Hypergraph, spec: CoverSpec, built_in: Optional[IndependenceCover],
                  limits: Limits = LIMITS) -> IndependenceCover:
    if spec.classes is not None:
        cover = IndependenceCover(
            classes=tuple(tuple(sorted(c)) for c in spec.classes),
            weights=tuple(spec.weights) if spec.weights is not None else None,
        )
    elif spec.method == "exact":
        cover = exact_coloring(h, limits.color_vertex_limit)
    elif spec.method == "greedy" or built_in is None:
        cover = greedy_coloring(h)
    else:
        cover = built_in
    check = validate_cover(h, cover)
    if not check.ok:
        raise CoverError(f"cover rejected: {check.reason}")
    return cover


def resolve_noise(spec: NoiseSpec) -> NoiseModel:
    try:
        return NoiseModel(spec.z_flip, spec.x_flip, spec.depolarizing, spec.z_distribution)
    except NoiseModelError as exc:
        raise ConfigError(f"prover.noise: {exc}") from exc


def resolve_correctable(spec: CorrectableSpec) -> CorrectableSet:
    try:
        return CorrectableSet(spec.mode, spec.t, frozenset(spec.syndromes))
    except WorkbenchError as exc:
        raise ConfigError(f"S: {exc}") from exc


def parse_correctable(text: str) -> CorrectableSet:
    """CLI form: 'zero', 'weight:T' or 'list:0110,1000'."""
    mode, _, arg = text.partition(":")
    try:
        if mode == "zero" and not arg:
            return CorrectableSet.zero()
        if mode == "weight":
            return CorrectableSet.weight(int(arg))
        if mode == "list":
            return CorrectableSet.listed(s.strip() for s in arg.split(",") if s.strip())
    except (ValueError, WorkbenchError) as exc:
        raise ConfigError(f"S {text!r}: {exc}") from exc
    raise ConfigError(f"S {text!r}: expected zero, weight:T or list:BITS,...")


def load_cover_file(path: Path) -> IndependenceCover:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: cover document must be a JSON object")
    return IndependenceCover.from_dict(data)


@dataclass(frozen=True)
class ResolvedState:
    """A test input: a pure state, or the maximally mixed state."""
    label: str
    n: int
    pure: Optional[StateVector] = None

    @property
    def mixed(self) -> bool:
        return self.pure is None

    def analytic(self, density_max_qubits: Optional[int] = None) -> AnyState:
        if self.pure is not None:
            return self.pure
        return DensityMatrix.maximally_mixed(self.n, density_max_qubits)

    def sample(self, basis: str, rng: np.random.Generator, shots: int) -> np.ndarray:
        if self.pure is not None:
            return sample_outcomes(self.pure, basis, rng, shots)
        # I/2^n gives uniform outcomes in every product basis
        return rng.integers(0, 2, size=(shots, self.n), dtype=np.uint8)


def _vertex_list(text: str, n: int, label: str) -> List[int]:
    try:
        verts = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"state {label!r}: vertex lists are comma-separated integers")
    for v in verts:
        if v < 0 or v >= n:
            raise ConfigError(f"state {label!r}: vertex {v} out of range 0..{n - 1}")
    return verts


def resolve_state(spec: str, h: Hypergraph, max_qubits: Optional[int] = None) -> ResolvedState:
    """Shorthands: hypergraph, zero, plus, mixed, z:0,2, x:1, pauli:IXZ, random:7, zsup:0;1."""
    kind, _, arg = spec.partition(":")
    n = h.n
    if kind == "hypergraph":
        return ResolvedState(spec, n, build_state(h, max_qubits))
    if kind == "zero":
        return ResolvedState(spec, n, StateVector.basis(n, 0))
    if kind == "plus":
        return ResolvedState(spec, n, StateVector.plus(n))
    if kind == "mixed":
        return ResolvedState(spec, n, None)
    if kind == "z":
        return ResolvedState(spec, n, z_error_state(build_state(h, max_qubits), _vertex_list(arg, n, spec)))
    if kind == "x":
        x_mask = sum(1 << v for v in set(_vertex_list(arg, n, spec)))
        ideal = build_state(h, max_qubits)
        return ResolvedState(spec, n, StateVector(n, apply_masks(ideal.amplitudes, n, x_mask, 0)))
    if kind == "pauli":
        try:
            x_mask, z_mask = pauli_masks(arg, n)
        except WorkbenchError as exc:
            raise ConfigError(f"state {spec!r}: {exc}") from exc
        ideal = build_state(h, max_qubits)
        return ResolvedState(spec, n, StateVector(n, apply_masks(ideal.amplitudes, n, x_mask, z_mask)))
    if kind == "random":
        try:
            seed = int(arg or "0")
        except ValueError:
            raise ConfigError(f"state {spec!r}: seed must be an integer")
        return ResolvedState(spec, n, random_state(n, make_rng(seed)))
    if kind == "zsup":
        ideal = build_state(h, max_qubits)
        members = [z_error_state(ideal, _vertex_list(part, n, spec)) for part in arg.split(";")]
        try:
            return ResolvedState(spec, n, superposition(members))
        except WorkbenchError as exc:
            raise ConfigError(f"state {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown state spec {spec!r}")


def resolve_prover(spec: ProverSpec, h: Hypergraph) -> ProverModel:
    if spec.variant == "honest":
        return ProverModel.honest()
    if spec.variant == "iid-noisy":
        assert spec.noise is not None
        return ProverModel.iid_noisy(resolve_noise(spec.noise))
    state = resolve_state(spec.state, h) if spec.state is not None else None
    if state is not None and state.pure is None:
        raise ConfigError("prover.state: provers emit pure states")
    if spec.variant == "single-bad-copy":
        return ProverModel.single_bad_copy(state.pure if state else None)
    assert state is not None and state.pure is not None
    return ProverModel.fixed_state(state.pure, label=state.label)


def resolve_params(spec: ParamsSpec, h: Hypergraph, cover: IndependenceCover) -> ProtocolParams:
    gamma = spec.gamma or cover.m
    if spec.mode == "paper":
        if gamma < 2:
            raise ConfigError("params.gamma: full-scale parameters need gamma >= 2")
        try:
            return derive_paper_params(h.n, gamma, spec.r, spec.k)
        except WorkbenchError as exc:
            raise ConfigError(f"params: {exc}") from exc
    upsilon = spec.upsilon or max(1, gamma * (gamma - 1) // 2)
    ks = spec.k_per_group if spec.k_per_group is not None else [spec.k] * upsilon
    if len(ks) != upsilon:
        raise ConfigError("params.k_per_group: one entry per group required")
    try:
        return desk_params(h.n, upsilon, list(ks), spec.d, spec.epsilon, spec.r, spec.threshold, spec.gamma)
    except WorkbenchError as exc:
        raise ConfigError(f"params: {exc}") from exc


@dataclass(frozen=True)
class ResolvedRun:
    config: RunConfig
    hypergraph: Hypergraph
    cover: IndependenceCover
    params: ProtocolParams
    prover: ProverModel
    S: CorrectableSet


def resolve_run(cfg: RunConfig, base_dir: Optional[Path] = None, limits: Limits = LIMITS) -> ResolvedRun:
    h, built_in = resolve_hypergraph(cfg.hypergraph, base_dir)
    if h.n > limits.sim_max_qubits:
        raise ConfigError(f"hypergraph: {h.n} qubits exceed the simulator limit {limits.sim_max_qubits}")
    cover = resolve_cover(h, cfg.cover, built_in, limits)
    params = resolve_params(cfg.params, h, cover)
    return ResolvedRun(cfg, h, cover, params, resolve_prover(cfg.prover, h), resolve_correctable(cfg.S))
