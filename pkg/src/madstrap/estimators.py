"""Order-statistic estimators: median, MAD, their index-shifted variants, ECDFs.

All indices are 1-based in the public API, matching X_{k:n} notation, and
all index arithmetic is done on Python ints.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class SortedSample:
    values: np.ndarray
    sorted: np.ndarray

    @classmethod
    def of(cls, data) -> "SortedSample":
        values = np.array(data, dtype=float).ravel()
        values.setflags(write=False)
        srt = np.sort(values, kind="stable")
        srt.setflags(write=False)
        return cls(values, srt)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class AbsDeviations:
    center: float
    devs: np.ndarray
    sorted_devs: np.ndarray


@dataclass(frozen=True)
class EcdfEval:
    """F_n(x) and its left limit F_n(x-)."""

    at: float
    value: float
    left: float
    n: int

    @property
    def tie_count(self) -> int:
        return int(round((self.value - self.left) * self.n))


def _as_sorted(s) -> SortedSample:
    return s if isinstance(s, SortedSample) else SortedSample.of(s)


def _nonempty(s: SortedSample):
    if s.n == 0:
        raise DomainError("empty sample")


def order_stat(s, k: int) -> float:
    s = _as_sorted(s)
    if not 1 <= k <= s.n:
        raise IndexError(f"order statistic {k} out of range for n={s.n}")
    return float(s.sorted[k - 1])


def _mid_pair(sorted_vals: np.ndarray, n: int) -> float:
    return 0.5 * (float(sorted_vals[(n + 1) // 2 - 1]) + float(sorted_vals[(n + 2) // 2 - 1]))


def sample_median(s) -> float:
    s = _as_sorted(s)
    _nonempty(s)
    return _mid_pair(s.sorted, s.n)


def abs_deviations(s, center: float) -> AbsDeviations:
    s = _as_sorted(s)
    devs = np.abs(s.values - center)
    return AbsDeviations(float(center), devs, np.sort(devs))


def sample_mad(s) -> float:
    """(W_{floor((n+1)/2):n} + W_{floor((n+2)/2):n}) / 2 with W_i = |X_i - Med_n|."""
    s = _as_sorted(s)
    _nonempty(s)
    w = abs_deviations(s, sample_median(s)).sorted_devs
    return _mid_pair(w, s.n)


def _check_index(name: str, value: int, n: int):
    if not 1 <= value <= n // 2:
        raise DomainError(f"{name}={value} must satisfy 1 <= {name} <= floor(n/2) = {n // 2}")


def generalized_median(s, l: int) -> float:
    """X_{floor((n+l)/2):n}."""
    s = _as_sorted(s)
    _check_index("l", l, s.n)
    return float(s.sorted[(s.n + l) // 2 - 1])


def generalized_mad(s, m: int, l: int) -> float:
    """floor((n+m)/2)-th order statistic of |X_i - generalized_median(s, l)|."""
    s = _as_sorted(s)
    _check_index("m", m, s.n)
    center = generalized_median(s, l)
    w = abs_deviations(s, center).sorted_devs
    return float(w[(s.n + m) // 2 - 1])


def modified_mad(s, k: int) -> float:
    """(W_{floor((n+k)/2):n} + W_{floor((n+k+1)/2):n}) / 2, deviations about Med_n."""
    s = _as_sorted(s)
    if not 1 <= k <= s.n - 1:
        raise DomainError(f"k={k} must satisfy 1 <= k <= n-1 = {s.n - 1}")
    w = abs_deviations(s, sample_median(s)).sorted_devs
    return 0.5 * (float(w[(s.n + k) // 2 - 1]) + float(w[(s.n + k + 1) // 2 - 1]))


def ecdf(s, x: float) -> EcdfEval:
    s = _as_sorted(s)
    _nonempty(s)
    le = int(np.searchsorted(s.sorted, x, side="right"))
    lt = int(np.searchsorted(s.sorted, x, side="left"))
    return EcdfEval(float(x), le / s.n, lt / s.n, s.n)


def absdev_ecdf(s, center: float, y: float) -> EcdfEval:
    """G_n(y) = #{|X_i - center| <= y} / n, with left limit."""
    s = _as_sorted(s)
    _nonempty(s)
    w = abs_deviations(s, center).sorted_devs
    le = int(np.searchsorted(w, y, side="right"))
    lt = int(np.searchsorted(w, y, side="left"))
    return EcdfEval(float(y), le / s.n, lt / s.n, s.n)


# Row-wise versions used by the Monte Carlo code; ``rows`` is (R, n) and
# each row must already be sorted ascending.

def batch_median(rows: np.ndarray) -> np.ndarray:
    n = rows.shape[1]
    return 0.5 * (rows[:, (n + 1) // 2 - 1] + rows[:, (n + 2) // 2 - 1])


def batch_med_mad(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = rows.shape[1]
    med = batch_median(rows)
    w = np.sort(np.abs(rows - med[:, None]), axis=1)
    return med, 0.5 * (w[:, (n + 1) // 2 - 1] + w[:, (n + 2) // 2 - 1])


def batch_generalized(rows: np.ndarray, m: int, l: int) -> tuple[np.ndarray, np.ndarray]:
    """(v_hat_{n,l}, xi_hat_{n,m,l}) per row."""
    n = rows.shape[1]
    _check_index("l", l, n)
    _check_index("m", m, n)
    center = rows[:, (n + l) // 2 - 1]
    w = np.sort(np.abs(rows - center[:, None]), axis=1)
    return center, w[:, (n + m) // 2 - 1]


def batch_ecdf(rows: np.ndarray, x: float) -> np.ndarray:
    """F_n(x) per row (rows need not be sorted)."""
    return np.count_nonzero(rows <= x, axis=1) / rows.shape[1]
