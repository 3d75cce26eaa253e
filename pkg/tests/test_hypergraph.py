import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.hypergraph import (
    Hypergraph,
    IndependenceCover,
    adjacency_matrix,
    dumps_document,
    exact_chromatic_number,
    from_generator,
    greedy_coloring,
    loads_document,
    parse_hypergraph,
    primal_graph,
    random_hypergraph,
    serialize_hypergraph,
    union_jack,
    validate_cover,
)
from src.core.models import HypergraphError, HypergraphParseError, SizeLimitError


def test_parse_triangle_hyperedge():
    h = parse_hypergraph("3\n0 1 2")
    assert h.n == 3
    assert h.edges == ((0, 1, 2),)


def test_parse_duplicate_lines_cancel():
    assert parse_hypergraph("2\n0 1\n0 1").edges == ()
    assert parse_hypergraph("3\n0 1\n1 0\n1 2").edges == ((1, 2),)


def test_parse_four_cycle():
    h = parse_hypergraph("4\n0 1\n1 2\n2 3\n3 0")
    assert set(h.edges) == {(0, 1), (1, 2), (2, 3), (0, 3)}


@pytest.mark.parametrize("text, line", [
    ("3\n0 x", 2),
    ("3\n0 3", 2),
    ("3\n1", 2),
    ("3\n0 0", 2),
    ("3\n\n# comment\n0 5", 4),
    ("abc", 1),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(HypergraphParseError) as info:
        parse_hypergraph(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_constructor_rejects_bad_edges():
    with pytest.raises(HypergraphError):
        Hypergraph(3, ((0,),))
    with pytest.raises(HypergraphError):
        Hypergraph(3, ((0, 1), (0, 1)))
    with pytest.raises(HypergraphError):
        Hypergraph(3, ((0, 4),))


def test_primal_graph_examples():
    assert primal_graph(parse_hypergraph("3\n0 1 2")).number_of_edges() == 3
    assert primal_graph(Hypergraph.from_edges(4, [])).number_of_edges() == 0
    h, _ = union_jack(1)
    g = primal_graph(h)
    center = 4
    assert sorted(g.neighbors(center)) == [0, 1, 2, 3]
    # corners 0-1-3-2 form a ring, diagonals absent
    assert {tuple(sorted(e)) for e in g.edges if center not in e} == {(0, 1), (1, 3), (2, 3), (0, 2)}


def test_greedy_coloring_examples():
    assert greedy_coloring(parse_hypergraph("3\n0 1 2")).m == 3
    empty = greedy_coloring(Hypergraph.from_edges(4, []))
    assert empty.classes == ((0, 1, 2, 3),)
    c4 = greedy_coloring(parse_hypergraph("4\n0 1\n1 2\n2 3\n3 0"))
    assert c4.classes == ((0, 2), (1, 3))


def test_greedy_rejects_non_permutation():
    with pytest.raises(HypergraphError):
        greedy_coloring(Hypergraph.from_edges(3, [(0, 1)]), order=[0, 0, 1])


def test_exact_chromatic_number_examples():
    assert exact_chromatic_number(parse_hypergraph("3\n0 1 2")).gamma == 3
    assert exact_chromatic_number(from_generator("cycle:4")[0]).gamma == 2
    assert exact_chromatic_number(from_generator("cycle:5")[0]).gamma == 3
    assert exact_chromatic_number(Hypergraph.from_edges(3, [])).gamma == 1


def test_exact_chromatic_number_size_limit():
    with pytest.raises(SizeLimitError):
        exact_chromatic_number(Hypergraph.from_edges(21, [(0, 1)]))
    assert exact_chromatic_number(Hypergraph.from_edges(6, [(0, 1)]), vertex_limit=6).gamma == 2


def test_validate_cover_examples():
    tri = parse_hypergraph("3\n0 1 2")
    assert validate_cover(tri, IndependenceCover(((0,), (1,), (2,)))).ok
    bad = validate_cover(tri, IndependenceCover(((0, 1), (2,))))
    assert not bad.ok
    assert bad.edge == (0, 1, 2)
    assert bad.class_index == 0
    assert not validate_cover(tri, IndependenceCover(((0,), (1,)))).ok
    weighted = IndependenceCover(((0,), (1,), (2,)), weights=(0.5, 0.25, 0.2))
    assert not validate_cover(tri, weighted).ok


def test_overlapping_cover_is_accepted():
    h = Hypergraph.from_edges(3, [(0, 1)])
    assert validate_cover(h, IndependenceCover(((0, 2), (1, 2)))).ok


@pytest.mark.parametrize("L, n, edges, sizes", [(1, 5, 4, [2, 2, 1]), (2, 13, 16, [5, 4, 4])])
def test_union_jack_counts(L, n, edges, sizes):
    h, cover = union_jack(L)
    assert h.n == n
    assert len(h.edges) == edges
    assert cover.sizes() == sizes
    assert all(len(e) == 3 for e in h.edges)


@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_union_jack_cover_is_proper(L):
    h, cover = union_jack(L)
    assert validate_cover(h, cover).ok


@pytest.mark.parametrize("L", [1, 2])
def test_union_jack_is_three_colorable(L):
    h, _ = union_jack(L)
    assert exact_chromatic_number(h).gamma == 3


def test_union_jack_rejects_empty_lattice():
    with pytest.raises(HypergraphError):
        union_jack(0)


def test_adjacency_matrix_only_for_graphs():
    h = from_generator("cycle:4")[0]
    mat = adjacency_matrix(h)
    assert mat.sum() == 8
    assert mat[0, 1] == mat[1, 0] == 1
    with pytest.raises(HypergraphError):
        adjacency_matrix(parse_hypergraph("3\n0 1 2"))


def test_generator_specs():
    assert from_generator("triangle")[0].edges == ((0, 1, 2),)
    assert len(from_generator("complete:4")[0].edges) == 6
    assert from_generator("empty:3")[0].edges == ()
    a = from_generator("random:8:6:3:11")[0]
    b = from_generator("random:8:6:3:11")[0]
    assert a == b
    with pytest.raises(HypergraphError):
        from_generator("moebius:3")


@pytest.mark.parametrize("spec", ["random:1:1", "random:0:0", "random:4:-1"])
def test_random_generator_rejects_degenerate_sizes(spec):
    with pytest.raises(HypergraphError):
        from_generator(spec)


def test_random_hypergraph_uses_numpy_generator():
    a = random_hypergraph(6, 8, 4, np.random.default_rng(5))
    b = random_hypergraph(6, 8, 4, np.random.default_rng(5))
    assert a == b
    assert all(2 <= len(e) <= 4 for e in a.edges)
    assert random_hypergraph(2, 1) == Hypergraph.from_edges(2, [(0, 1)])


def test_json_document_roundtrip():
    h, cover = union_jack(1)
    h2, cover2 = loads_document(dumps_document(h, cover))
    assert h2 == h
    assert cover2 == cover
    h3, cover3 = loads_document(dumps_document(h))
    assert h3 == h and cover3 is None


@st.composite
def hypergraphs(draw, max_n=8):
    n = draw(st.integers(min_value=2, max_value=max_n))
    m = draw(st.integers(min_value=0, max_value=2 * n))
    seed = draw(st.integers(min_value=0, max_value=10_000))
    return random_hypergraph(n, m, 3, np.random.default_rng(seed))


@settings(max_examples=60, deadline=None)
@given(hypergraphs())
def test_greedy_cover_always_validates(h):
    assert validate_cover(h, greedy_coloring(h)).ok


@settings(max_examples=40, deadline=None)
@given(hypergraphs(), st.randoms(use_true_random=False))
def test_exact_never_exceeds_greedy(h, rnd):
    order = list(range(h.n))
    rnd.shuffle(order)
    greedy = greedy_coloring(h, order)
    exact = exact_chromatic_number(h)
    assert validate_cover(h, greedy).ok
    assert exact.gamma <= greedy.m


@settings(max_examples=60, deadline=None)
@given(hypergraphs())
def test_serialize_parse_roundtrip(h):
    assert parse_hypergraph(serialize_hypergraph(h)) == h
