import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.core.models import StatsInputError
from src.core.stats import (
    FrequencyEstimate,
    HoeffdingBound,
    binomial_tail,
    completeness_bound,
    derive_seed,
    hoeffding_tail,
    make_rng,
    min_passes,
    trial_rng,
    wilson_interval,
)

DATA = Path(__file__).parent / "data" / "seed_vectors.json"


def test_seed_golden_vectors():
    vectors = json.loads(DATA.read_text(encoding="utf-8"))["vectors"]
    for vec in vectors:
        assert derive_seed(vec["master"], vec["index"]) == int(vec["seed"], 16)


def test_seed_derivation_is_stable_and_distinct():
    seeds = [derive_seed(7, i) for i in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds == [derive_seed(7, i) for i in range(1000)]
    assert all(0 <= s < 2 ** 64 for s in seeds)
    with pytest.raises(StatsInputError):
        derive_seed(0, -1)


def test_trial_rng_reproduces_streams():
    a = trial_rng(42, 3).random(5)
    b = make_rng(derive_seed(42, 3)).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, trial_rng(42, 4).random(5))


def test_wilson_examples():
    low, high = wilson_interval(50, 100)
    assert math.isclose(low, 0.4038, abs_tol=1e-3)
    assert math.isclose(high, 0.5962, abs_tol=1e-3)
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    assert 0.0 < wilson_interval(0, 10)[1] < 0.35


@pytest.mark.parametrize("successes, trials, confidence", [(1, 0, 0.95), (5, 4, 0.95), (-1, 4, 0.95), (1, 4, 1.0)])
def test_wilson_rejects_bad_input(successes, trials, confidence):
    with pytest.raises(StatsInputError):
        wilson_interval(successes, trials, confidence)


@given(st.integers(min_value=1, max_value=5000).flatmap(
    lambda t: st.tuples(st.integers(min_value=0, max_value=t), st.just(t))))
def test_wilson_contains_point_estimate(pair):
    successes, trials = pair
    low, high = wilson_interval(successes, trials)
    assert 0.0 <= low <= successes / trials <= high <= 1.0


def test_wilson_coverage():
    rng = make_rng(2024)
    p, trials = 0.3, 200
    draws = rng.binomial(trials, p, size=1000)
    covered = sum(FrequencyEstimate.from_counts(int(s), trials).contains(p) for s in draws)
    assert 920 <= covered <= 980


def test_frequency_estimate_dict():
    est = FrequencyEstimate.from_counts(3, 4)
    data = est.to_dict()
    assert data["estimate"] == 0.75
    assert data["interval"][0] <= 0.75 <= data["interval"][1]
    assert math.isclose(est.sigma, math.sqrt(0.75 * 0.25 / 4))


def test_hoeffding_examples():
    assert math.isclose(hoeffding_tail(0.1, 1, 50), math.exp(-1))
    bound = HoeffdingBound(0.1, 1, 50)
    assert math.isclose(bound.exponent, 1.0)
    assert math.isclose(bound.value, math.exp(-1))
    assert completeness_bound(3, 5, 0.1, 1, 50) < 0
    assert math.isclose(completeness_bound(1, 1, 0.5, 1, 200), 1 - math.exp(-100))


@pytest.mark.parametrize("args", [(0, 1, 1), (0.1, 0, 1), (0.1, 1, 0), (0.1, 1, 0.5), (float("nan"), 1, 1)])
def test_hoeffding_rejects_bad_input(args):
    with pytest.raises(StatsInputError):
        hoeffding_tail(*args)


def test_binomial_tail_examples():
    assert math.isclose(binomial_tail(4, 0.5, 3), 5 / 16)
    assert binomial_tail(4, 0.5, 0) == 1.0
    assert binomial_tail(4, 0.5, 5) == 0.0
    assert math.isclose(binomial_tail(10, 1.0, 10), 1.0)
    with pytest.raises(StatsInputError):
        binomial_tail(4, 1.5, 2)


@pytest.mark.parametrize("k, threshold, expected", [(4, 0.74975, 3), (10, 0.7, 7), (4, 0.0, 0), (4, 1.0, 4), (3, 0.5, 2)])
def test_min_passes(k, threshold, expected):
    assert min_passes(k, threshold) == expected


@given(st.integers(min_value=1, max_value=500), st.floats(min_value=0.0, max_value=1.0))
def test_min_passes_matches_float_comparison(k, threshold):
    c = min_passes(k, threshold)
    assert c / k >= threshold
    if c > 0:
        assert (c - 1) / k < threshold
