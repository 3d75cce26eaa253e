import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.hypergraph import (
    Hypergraph,
    IndependenceCover,
    adjacency_matrix,
    greedy_coloring,
    random_hypergraph,
    union_jack,
)
from src.core.models import CoverError, WorkbenchError
from src.core.stabilizer import (
    CorrectableSet,
    TestSlot,
    acceptability_factors,
    acceptability_probability,
    analytic_pass_probability,
    closed_form_pass_probability,
    parity_check,
    parity_check_batch,
    run_color_test,
    run_color_tests,
    run_single_stabilizer_test,
    slot_vertices,
    stabilizer_subspace_weight,
    syndrome_distribution,
    test_schedule as schedule_for,
)
from src.core.stats import make_rng, within_sigma
from src.sim.state_sim import (
    DensityMatrix,
    Ensemble,
    NoiseModel,
    StateVector,
    build_state,
    noisy_density,
    random_state,
    z_error_state,
)


def triangle():
    h = Hypergraph.from_edges(3, [(0, 1, 2)])
    return h, IndependenceCover(((0,), (1,), (2,)))


def four_cycle():
    h = Hypergraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    return h, IndependenceCover(((0, 2), (1, 3)))


# ---- parity checks ---- #

@pytest.mark.parametrize("outcomes, bit", [([0, 1, 1], 1), ([1, 1, 1], 0), ([0, 1, 0], 0), ([1, 0, 0], 1)])
def test_parity_check_triangle(outcomes, bit):
    h, _ = triangle()
    assert parity_check(h, (0,), outcomes).bits == (bit,)


def test_parity_check_four_cycle():
    h, _ = four_cycle()
    syn = parity_check(h, (0, 2), [0, 1, 0, 0])
    assert syn.bits == (1, 1)
    assert syn.weight == 2
    assert parity_check(h, (0, 2), [1, 1, 1, 0]).bits == (0, 0)


def test_parity_check_rejects_improper_class_and_short_input():
    h, _ = triangle()
    with pytest.raises(CoverError):
        parity_check(h, (0, 1), [0, 0, 0])
    with pytest.raises(WorkbenchError):
        parity_check(h, (0,), [0, 0])


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=0, max_value=10_000))
def test_batch_parity_matches_scalar(graph_seed, outcome_seed):
    h = random_hypergraph(7, 9, 3, np.random.default_rng(graph_seed))
    cover = greedy_coloring(h)
    outcomes = np.random.default_rng(outcome_seed).integers(0, 2, size=(16, h.n)).astype(np.uint8)
    for vertices in cover.classes:
        batch = parity_check_batch(h, vertices, outcomes)
        for row, bits in zip(outcomes, batch):
            assert tuple(int(b) for b in bits) == parity_check(h, vertices, row).bits


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=10_000))
def test_two_uniform_parity_is_the_adjacency_linear_form(n, seed):
    rng = np.random.default_rng(seed)
    h = random_hypergraph(n, 2 * n, 2, rng)
    assert h.is_two_uniform()
    adjacency = adjacency_matrix(h).astype(np.int64)
    outcomes = rng.integers(0, 2, size=(12, n)).astype(np.uint8)
    # s_i = b_i + sum_j A_ij z_j; neighbours of a class vertex are all Z-measured
    linear = (outcomes.astype(np.int64) + outcomes.astype(np.int64) @ adjacency) % 2
    for vertices in greedy_coloring(h).classes:
        expected = linear[:, list(vertices)]
        np.testing.assert_array_equal(parity_check_batch(h, vertices, outcomes), expected)
        for row, bits in zip(outcomes, expected):
            assert parity_check(h, vertices, row).bits == tuple(int(b) for b in bits)


# ---- correctable sets ---- #

def test_correctable_set_modes():
    assert CorrectableSet.zero().contains([0, 0])
    assert not CorrectableSet.zero().contains([0, 1])
    assert CorrectableSet.weight(1).contains([0, 1, 0])
    assert not CorrectableSet.weight(1).contains([1, 1, 0])
    listed = CorrectableSet.listed(["10"])
    assert listed.contains([1, 0])
    assert listed.contains([0, 0])
    assert not listed.contains([0, 1])
    assert listed.admits_prefix("1")
    assert not listed.admits_prefix("01")
    assert CorrectableSet.from_dict(CorrectableSet.weight(2).to_dict()) == CorrectableSet.weight(2)
    with pytest.raises(WorkbenchError):
        CorrectableSet("fuzzy")


def test_contains_batch_agrees_with_contains():
    bits = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=np.uint8)
    for S in (CorrectableSet.zero(), CorrectableSet.weight(1), CorrectableSet.listed(["01", "11"])):
        assert S.contains_batch(bits).tolist() == [S.contains(row) for row in bits]


# ---- schedule ---- #

def test_schedule_runs_primaries_then_duals():
    _, cover = triangle()
    slots = schedule_for(cover)
    assert [s.label() for s in slots] == ["0/primary", "1/primary", "2/primary", "0/dual", "1/dual", "2/dual"]
    assert TestSlot(2, "dual").x_class(3) == 0
    assert TestSlot(1, "primary").x_class(3) == 1


# ---- sampled tests ---- #

@pytest.mark.parametrize("config", ["primary", "dual"])
def test_honest_state_always_passes(config):
    h, cover = union_jack(2)
    state = build_state(h)
    rng = make_rng(4)
    for l in range(cover.m):
        batch = run_color_tests(state, h, cover, l, CorrectableSet.zero(), rng, 300, config)
        assert batch.pass_count == 300
        assert not batch.syndromes.any()


def test_z_error_fails_only_its_class():
    h, cover = triangle()
    bad = z_error_state(build_state(h), [0])
    rng = make_rng(5)
    assert not run_color_test(bad, h, cover, 0, CorrectableSet.zero(), rng).passed
    assert run_color_test(bad, h, cover, 1, CorrectableSet.zero(), rng).passed
    assert not run_color_test(bad, h, cover, 2, CorrectableSet.zero(), rng, "dual").passed


def test_run_color_test_validates_cover():
    h, _ = triangle()
    rng = make_rng(0)
    with pytest.raises(CoverError):
        run_color_test(build_state(h), h, IndependenceCover(((0, 1), (2,))), 0, CorrectableSet.zero(), rng)
    with pytest.raises(CoverError):
        run_color_test(build_state(h), h, triangle()[1], 3, CorrectableSet.zero(), rng)


def test_single_stabilizer_test_signs():
    h, _ = triangle()
    rng = make_rng(6)
    ideal = build_state(h)
    assert all(run_single_stabilizer_test(ideal, h, i, rng) == 1 for i in range(3))
    assert run_single_stabilizer_test(z_error_state(ideal, [2]), h, 2, rng) == -1


def test_sampled_rate_matches_analytic():
    h = random_hypergraph(6, 6, 3, np.random.default_rng(12))
    cover = greedy_coloring(h)
    state = random_state(h.n, make_rng(13))
    shots = 20_000
    for l in range(cover.m):
        exact = analytic_pass_probability(state, h, cover, l, CorrectableSet.zero())
        batch = run_color_tests(state, h, cover, l, CorrectableSet.zero(), make_rng(100 + l), shots)
        assert within_sigma(batch.pass_count / shots, exact, shots, 5.0)


# ---- analytic oracle ---- #

def test_analytic_examples():
    h, cover = union_jack(1)
    assert math.isclose(analytic_pass_probability(build_state(h), h, cover, 0, CorrectableSet.zero()), 1.0)
    mixed = DensityMatrix.maximally_mixed(h.n)
    assert math.isclose(analytic_pass_probability(mixed, h, cover, 0, CorrectableSet.zero()), 0.25)
    assert math.isclose(analytic_pass_probability(mixed, h, cover, 2, CorrectableSet.zero()), 0.5)


def test_plus_state_on_triangle():
    h, cover = triangle()
    plus = StateVector.plus(3)
    assert math.isclose(analytic_pass_probability(plus, h, cover, 0, CorrectableSet.zero()), 0.75)
    assert math.isclose(stabilizer_subspace_weight(plus, h), 0.5625)


def test_syndrome_distribution_of_error_ensemble():
    h, _ = four_cycle()
    ideal = build_state(h)
    ens = Ensemble((ideal, z_error_state(ideal, [0]), z_error_state(ideal, [0, 2])), (0.5, 0.25, 0.25))
    dist = syndrome_distribution(ens, h, (0, 2))
    assert math.isclose(dist["00"], 0.5)
    assert math.isclose(dist["10"], 0.25)
    assert math.isclose(dist["11"], 0.25)
    assert math.isclose(sum(dist.values()), 1.0)


def test_weight_set_accepts_single_flip():
    h, cover = four_cycle()
    bad = z_error_state(build_state(h), [2])
    assert math.isclose(analytic_pass_probability(bad, h, cover, 0, CorrectableSet.weight(1)), 1.0)
    assert analytic_pass_probability(bad, h, cover, 0, CorrectableSet.zero()) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=6), st.integers(min_value=0, max_value=10_000),
       st.sampled_from(["primary", "dual"]))
def test_larger_correctable_set_never_lowers_pass_probability(n, seed, config):
    h = random_hypergraph(n, n, 3, np.random.default_rng(seed))
    cover = greedy_coloring(h)
    state = random_state(n, make_rng(seed + 1))
    for l in range(cover.m):
        size = len(slot_vertices(cover, TestSlot(l, config)))
        nested = [
            CorrectableSet.zero(),
            CorrectableSet.listed(["1" + "0" * (size - 1)]),
            CorrectableSet.weight(1),
            CorrectableSet.weight(size),
        ]
        probs = [analytic_pass_probability(state, h, cover, l, S, config) for S in nested]
        for smaller, larger in zip(probs, probs[1:]):
            assert smaller <= larger + 1e-12
        assert probs[-1] == pytest.approx(1.0)


# ---- acceptability ---- #

def test_closed_form_examples():
    p = 0.1
    noise = NoiseModel(z_flip=p)
    assert math.isclose(closed_form_pass_probability(noise, 5, (0, 3), CorrectableSet.zero()), (1 - p) ** 2)
    assert math.isclose(closed_form_pass_probability(noise, 5, (0, 3), CorrectableSet.weight(1)), 1 - p ** 2)
    point = NoiseModel(z_distribution={"10000": 1.0})
    assert closed_form_pass_probability(point, 5, (0, 3), CorrectableSet.zero()) == 0.0
    assert closed_form_pass_probability(point, 5, (0, 3), CorrectableSet.listed(["10"])) == 1.0
    with pytest.raises(WorkbenchError):
        closed_form_pass_probability(NoiseModel(x_flip=0.1), 5, (0,), CorrectableSet.zero())


def test_closed_form_matches_density_oracle():
    h, cover = triangle()
    p = 0.05
    noise = NoiseModel(z_flip=p)
    closed = acceptability_probability(noise, h, cover, CorrectableSet.zero(), 2)
    dense = acceptability_probability(noise, h, cover, CorrectableSet.zero(), 2, method="density")
    assert math.isclose(closed, (1 - p) ** 12)
    assert math.isclose(dense, closed, rel_tol=1e-9)


def test_auto_method_choice_and_trivial_noise():
    h, cover = union_jack(1)
    factors = acceptability_factors(NoiseModel(depolarizing=0.05), h, cover, CorrectableSet.zero())
    assert {f.method for f in factors} == {"density"}
    assert len(factors) == 6
    assert acceptability_probability(NoiseModel(), h, cover, CorrectableSet.zero(), 7) == 1.0
    assert acceptability_probability(NoiseModel(z_flip=0.2), h, cover, CorrectableSet.zero(), 0) == 1.0


def test_density_against_monte_carlo():
    h, cover = union_jack(1)
    noise = NoiseModel(x_flip=0.05)
    rho = noisy_density(h, noise)
    exact = analytic_pass_probability(rho, h, cover, 0, CorrectableSet.zero())
    samples = 5_000
    mc = acceptability_factors(noise, h, cover, CorrectableSet.zero(), method="monte-carlo",
                               samples=samples, rng=make_rng(31))[0].probability
    assert within_sigma(mc, exact, samples, 5.0)


def test_acceptability_is_monotone_in_k():
    h, cover = union_jack(1)
    noise = NoiseModel(z_flip=0.02)
    values = [acceptability_probability(noise, h, cover, CorrectableSet.zero(), k) for k in (1, 2, 4, 8)]
    assert values == sorted(values, reverse=True)


def test_single_z_error_deterministic_under_both_sets():
    h, cover = union_jack(1)
    bad = z_error_state(build_state(h), [0])
    rng = make_rng(77)
    assert run_color_tests(bad, h, cover, 0, CorrectableSet.zero(), rng, 10_000).pass_count == 0
    assert run_color_tests(bad, h, cover, 0, CorrectableSet.weight(1), rng, 10_000).pass_count == 10_000
