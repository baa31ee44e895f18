"""Deterministic nonparametric bootstrap and its exact small-n enumeration."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DegenerateError, DomainError, SizeLimitError
from .estimators import SortedSample, _as_sorted, sample_mad, sample_median
from .rng import Stream, hash64

MAX_ENUMERATION_N = 8


@dataclass(frozen=True)
class ResamplePlan:
    master_seed: int
    replicate_index: int

    @property
    def seed(self) -> int:
        return hash64(self.master_seed, self.replicate_index)

    def stream(self) -> Stream:
        return Stream(self.seed)


@dataclass(frozen=True)
class BootstrapSample:
    """``indices`` are 0-based positions into ``parent.values``."""

    parent: SortedSample
    indices: np.ndarray
    resampled: SortedSample = field(repr=False)


def resample(s, plan: ResamplePlan) -> BootstrapSample:
    s = _as_sorted(s)
    if s.n == 0:
        raise DomainError("cannot resample an empty sample")
    idx = plan.stream().indices(s.n, s.n)
    return BootstrapSample(s, idx, SortedSample.of(s.values[idx]))


def bootstrap_med_mad(s, plan: ResamplePlan) -> tuple[float, float]:
    bs = resample(s, plan)
    return sample_median(bs.resampled), sample_mad(bs.resampled)


def resample_rows(values: np.ndarray, master_seed: int, start: int, count: int) -> np.ndarray:
    """Resampled data for replicates ``start .. start+count-1``, one row each.

    Row r equals ``resample(s, ResamplePlan(master_seed, start + r)).resampled.values``.
    """
    n = values.size
    out = np.empty((count, n))
    for r in range(count):
        out[r] = values[Stream(hash64(master_seed, start + r)).indices(n, n)]
    return out


@dataclass(frozen=True)
class ExactDistribution:
    """Exact law of a bootstrap statistic; probabilities are rationals.

    ``excluded`` is the probability of resamples where the statistic was
    undefined (it raised :class:`DegenerateError`).
    """

    outcomes: tuple[tuple[float, Fraction], ...]
    excluded: Fraction = Fraction(0)

    def probability(self, value: float) -> Fraction:
        return sum((p for x, p in self.outcomes if x == value), Fraction(0))

    @property
    def valid_mass(self) -> Fraction:
        return sum((p for _, p in self.outcomes), Fraction(0))

    def mean(self) -> float:
        """Mean conditional on the statistic being defined."""
        return math.fsum(float(p) * x for x, p in self.outcomes) / float(self.valid_mass)

    def variance(self) -> float:
        mu = self.mean()
        return math.fsum(float(p) * (x - mu) ** 2 for x, p in self.outcomes) / float(self.valid_mass)


def _compositions(n: int, parts: int):
    # count vectors (c_1..c_parts) with sum n
    for bars in itertools.combinations(range(n + parts - 1), parts - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(n + parts - 1 - prev - 1)
        yield counts


def enumerate_resamples(s, statistic: Callable[[SortedSample], float]) -> ExactDistribution:
    """Exact distribution of ``statistic`` over all n**n equiprobable resamples.

    Index vectors are grouped by their count vector; each group has the
    multinomial number of members, so the result equals the full n**n sum.
    """
    s = _as_sorted(s)
    n = s.n
    if n == 0:
        raise DomainError("empty sample")
    if n > MAX_ENUMERATION_N:
        raise SizeLimitError(f"enumeration limited to n <= {MAX_ENUMERATION_N}, got {n}")
    total = n**n
    fact_n = math.factorial(n)
    mass: dict[float, int] = {}
    excluded = 0
    for counts in _compositions(n, n):
        ways = fact_n
        for c in counts:
            ways //= math.factorial(c)
        data = np.repeat(s.values, counts)
        try:
            x = float(statistic(SortedSample.of(data)))
        except DegenerateError:
            excluded += ways
            continue
        mass[x] = mass.get(x, 0) + ways
    outcomes = tuple((x, Fraction(c, total)) for x, c in sorted(mass.items()))
    return ExactDistribution(outcomes, Fraction(excluded, total))
