import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.hypergraph import Hypergraph, dumps_document, union_jack
from src.core.models import ConfigError, CoverError
from src.core.stabilizer import CorrectableSet
from src.io.specs import (
    CoverSpec,
    ParamsSpec,
    ProverSpec,
    load_hypergraph_source,
    load_run_config,
    parse_correctable,
    parse_run_config,
    resolve_cover,
    resolve_params,
    resolve_prover,
    resolve_run,
    resolve_state,
    run_config_schema,
)
from src.sim.state_sim import fidelity


def config_text(**overrides):
    data = {"experiment": "verification", "hypergraph": {"generator": "union-jack:1"}}
    data.update(overrides)
    return json.dumps(data)


def test_minimal_config_resolves_with_defaults():
    run = resolve_run(parse_run_config(config_text()))
    assert run.hypergraph.n == 5
    assert run.cover.m == 3
    assert run.params.upsilon == 3
    assert run.params.k_per_group == (1, 1, 1)
    assert run.prover.variant == "honest"
    assert run.S == CorrectableSet.zero()
    assert run.config.trials == 1 and run.config.seed == 0


@pytest.mark.parametrize("override, fragment", [
    ({"params": {"k": 0}}, "params.k"),
    ({"bogus": 1}, "bogus"),
    ({"experiment": "party"}, "experiment"),
    ({"hypergraph": {"generator": "triangle", "n": 3}}, "exactly one"),
    ({"prover": {"variant": "iid-noisy"}}, "needs noise"),
    ({"params": {"upsilon": 2, "k_per_group": [1, 2, 3]}}, "one entry per group"),
    ({"trials": 0}, "trials"),
])
def test_schema_violations_name_the_field(override, fragment):
    with pytest.raises(ConfigError) as info:
        parse_run_config(config_text(**override))
    assert fragment in str(info.value)


def test_json_syntax_error_reports_position():
    with pytest.raises(ConfigError) as info:
        parse_run_config('{\n  "experiment": ,\n}')
    assert "line 2 column" in str(info.value)
    with pytest.raises(ConfigError):
        parse_run_config("[1, 2]")


def test_load_run_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "nope.json")


def test_schema_export_lists_experiments():
    schema = run_config_schema()
    assert "experiment" in schema["properties"]
    assert "hypergraph" in schema["required"]


def test_load_hypergraph_from_files(tmp_path):
    edge_list = tmp_path / "tri.txt"
    edge_list.write_text("# triangle\n3\n0 1 2\n", encoding="utf-8")
    h, cover = load_hypergraph_source("tri.txt", tmp_path)
    assert h.edges == ((0, 1, 2),) and cover is None
    uj, uj_cover = union_jack(1)
    doc = tmp_path / "uj.json"
    doc.write_text(dumps_document(uj, uj_cover), encoding="utf-8")
    h2, cover2 = load_hypergraph_source(str(doc))
    assert h2 == uj and cover2 == uj_cover
    with pytest.raises(ConfigError):
        load_hypergraph_source("no-such-file")


def test_explicit_cover_is_validated():
    h = Hypergraph.from_edges(3, [(0, 1, 2)])
    with pytest.raises(CoverError):
        resolve_cover(h, CoverSpec(classes=[[0, 1], [2]]), None)
    assert resolve_cover(h, CoverSpec(method="exact"), None).m == 3


def test_state_shorthands():
    h, _ = union_jack(1)
    ideal = resolve_state("hypergraph", h).pure
    assert fidelity(ideal, resolve_state("z:0", h).pure) < 1e-12
    assert fidelity(ideal, resolve_state("x:4", h).pure) < 1.0
    assert resolve_state("mixed", h).mixed
    plus = resolve_state("plus", h).pure
    assert np.allclose(np.abs(plus.amplitudes), 1 / np.sqrt(32))
    assert resolve_state("pauli:ZIIII", h).pure is not None
    a = resolve_state("random:3", h).pure
    b = resolve_state("random:3", h).pure
    assert np.array_equal(a.amplitudes, b.amplitudes)
    half = resolve_state("zsup:0;1", h).pure
    assert half.is_normalized()


@pytest.mark.parametrize("spec", ["z:9", "z:a", "pauli:XX", "warp", "zsup:0;x"])
def test_bad_state_shorthands(spec):
    h, _ = union_jack(1)
    with pytest.raises(ConfigError):
        resolve_state(spec, h)


def test_mixed_state_samples_uniformly():
    h, _ = union_jack(1)
    bits = resolve_state("mixed", h).sample("XXZZZ", np.random.default_rng(0), 4000)
    assert bits.shape == (4000, 5)
    assert abs(bits.mean() - 0.5) < 0.03


def test_parse_correctable_forms():
    assert parse_correctable("zero") == CorrectableSet.zero()
    assert parse_correctable("weight:2") == CorrectableSet.weight(2)
    assert parse_correctable("list:01, 10") == CorrectableSet.listed(["01", "10"])
    for bad in ("weight:x", "list:0a", "maybe", "zero:1"):
        with pytest.raises(ConfigError):
            parse_correctable(bad)


def test_prover_resolution():
    h, _ = union_jack(1)
    assert resolve_prover(ProverSpec(variant="single-bad-copy"), h).state is None
    fixed = resolve_prover(ProverSpec(variant="fixed-state", state="z:0"), h)
    assert fixed.label == "z:0"
    with pytest.raises(ConfigError):
        resolve_prover(ProverSpec(variant="fixed-state", state="mixed"), h)


def test_params_resolution():
    h, cover = union_jack(1)
    params = resolve_params(ParamsSpec(k=3, epsilon=0.1, r=2, d=2), h, cover)
    assert params.upsilon == 3
    assert params.register_count == 12
    assert resolve_params(ParamsSpec(gamma=4), h, cover).upsilon == 6
    full = resolve_params(ParamsSpec(mode="paper"), h, cover)
    assert full.mode == "paper"
    assert full.exact is not None


def test_full_scale_params_keep_rational_r():
    h, cover = union_jack(1)
    params = resolve_params(ParamsSpec(mode="paper", r=2.5), h, cover)
    assert params.exact.k_j == Fraction(1953125, 8)
    assert params.r == 2.5
    assert params.k_per_group == (244141,) * 3
    small = resolve_params(ParamsSpec(mode="paper", r=0.5), h, cover)
    assert small.exact.k_j == Fraction(78125, 8)


def test_shipped_configs_resolve():
    root = Path(__file__).resolve().parent.parent / "configs"
    paths = sorted(root.glob("*.json"))
    assert paths
    for path in paths:
        run = resolve_run(load_run_config(path), path.parent)
        assert run.params.mode == "desk"


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(min_value=-5, max_value=2 ** 70) | st.floats(allow_nan=False)
    | st.text(max_size=8),
    lambda children: st.lists(children, max_size=3) | st.dictionaries(st.text(max_size=6), children, max_size=3),
    max_leaves=6,
)
field_paths = st.sampled_from([
    ("experiment",), ("trials",), ("seed",), ("threads",), ("hypergraph",), ("hypergraph", "n"),
    ("hypergraph", "edges"), ("params",), ("params", "k"), ("params", "epsilon"), ("params", "k_per_group"),
    ("params", "mode"), ("prover", "variant"), ("prover", "noise"), ("S", "mode"), ("S", "t"),
    ("cover", "classes"), ("outputs",), ("unknown",),
])


@settings(max_examples=1000, deadline=None)
@given(field_paths, json_values)
def test_schema_mutations_never_crash(path, value):
    data = {"experiment": "verification", "hypergraph": {"generator": "union-jack:1"}}
    node = data
    for key in path[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            child = {}
            node[key] = child
        node = child
    node[path[-1]] = value
    try:
        parse_run_config(json.dumps(data))
    except ConfigError as exc:
        assert str(exc)
