from __future__ import annotations
"""Concentration bounds, interval estimates and seed derivation.

Every Monte-Carlo routine in the workbench draws from
make_rng(derive_seed(master, index)); derive_seed is the SplitMix64
finalizer applied to master + (index + 1) * golden-gamma, all mod 2**64,
so sub-seeds are identical on every platform and language.
"""
from dataclasses import dataclass
from typing import Tuple
import math

import numpy as np
from scipy import stats as _sps

from .models import StatsInputError

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


# ---- Seeds ---- #

def _splitmix64_mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    if index < 0:
        raise StatsInputError(f"trial index must be >= 0, got {index}")
    return _splitmix64_mix((master + (index + 1) * GOLDEN_GAMMA) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def trial_rng(master: int, index: int) -> np.random.Generator:
    return make_rng(derive_seed(master, index))


# ---- Intervals ---- #

def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    if trials < 1:
        raise StatsInputError(f"trials must be >= 1, got {trials}")
    if successes < 0 or successes > trials:
        raise StatsInputError(f"successes must lie in 0..{trials}, got {successes}")
    if not 0.0 < confidence < 1.0:
        raise StatsInputError(f"confidence must lie in (0, 1), got {confidence}")
    z = float(_sps.norm.ppf(0.5 + confidence / 2.0))
    p = successes / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (p + z2n / 2.0) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials))
    low = 0.0 if successes == 0 else max(0.0, min(p, center - half))
    high = 1.0 if successes == trials else min(1.0, max(p, center + half))
    return low, high


@dataclass(frozen=True)
class FrequencyEstimate:
    successes: int
    trials: int
    estimate: float
    low: float
    high: float
    confidence: float = 0.95

    @classmethod
    def from_counts(cls, successes: int, trials: int, confidence: float = 0.95) -> "FrequencyEstimate":
        low, high = wilson_interval(successes, trials, confidence)
        return cls(successes, trials, successes / trials, low, high, confidence)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.estimate * (1.0 - self.estimate) / self.trials)

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high

    def to_dict(self) -> dict:
        return {
            "successes": self.successes,
            "trials": self.trials,
            "estimate": self.estimate,
            "interval": [self.low, self.high],
            "confidence": self.confidence,
        }


def binomial_sigma(p: float, trials: int) -> float:
    if trials < 1:
        raise StatsInputError("trials must be >= 1")
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def within_sigma(observed: float, expected: float, trials: int, k: float = 3.0) -> bool:
    """|observed - expected| <= k binomial sigmas of the expected rate."""
    return abs(observed - expected) <= k * binomial_sigma(expected, trials) + 1e-12


# ---- Tails ---- #

def _positive(name: str, value: float) -> float:
    v = float(value)
    if not v > 0.0 or math.isnan(v):
        raise StatsInputError(f"{name} must be positive, got {value}")
    return v


def hoeffding_tail(epsilon: float, r: float, k: float) -> float:
    eps = _positive("epsilon", epsilon)
    rr = _positive("r", r)
    kk = _positive("k", k)
    if kk < 1:
        raise StatsInputError(f"k must be >= 1, got {k}")
    return math.exp(-2.0 * eps * eps * kk / (rr * rr))


@dataclass(frozen=True)
class HoeffdingBound:
    epsilon: float
    r: float
    k: float

    @property
    def exponent(self) -> float:
        return 2.0 * float(self.epsilon) ** 2 * float(self.k) / float(self.r) ** 2

    @property
    def value(self) -> float:
        return hoeffding_tail(self.epsilon, self.r, self.k)


def completeness_bound(upsilon: int, n_qubits: int, epsilon: float, r: float, k: float) -> float:
    """1 - upsilon * N * e^{-2 eps^2 k / r^2}; may be negative (vacuous)."""
    return 1.0 - upsilon * n_qubits * hoeffding_tail(epsilon, r, k)


def binomial_tail(trials: int, p: float, at_least: int) -> float:
    """P[Binomial(trials, p) >= at_least]."""
    if trials < 0 or not 0.0 <= p <= 1.0:
        raise StatsInputError(f"invalid binomial parameters ({trials}, {p})")
    if at_least <= 0:
        return 1.0
    if at_least > trials:
        return 0.0
    return float(_sps.binom.sf(at_least - 1, trials, p))


def min_passes(k: int, threshold: float) -> int:
    """Smallest K with K / k >= threshold."""
    if k < 1:
        raise StatsInputError("k must be >= 1")
    c = max(0, math.ceil(threshold * k))
    # agree with the float comparison the verifier makes
    while c > 0 and (c - 1) / k >= threshold:
        c -= 1
    while c <= k and c / k < threshold:
        c += 1
    return c
