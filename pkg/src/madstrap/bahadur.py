"""Bahadur linear terms, remainders and exponential concentration bounds.

The bootstrap median expands as

    Med* - v = (1/2 - F_n*(v)) / F'(v) + R,

and the bootstrap MAD (or any index-shifted xi*_{n,m,l}) as

    MAD* - xi = (1/2 - [F_n*(v+xi) - F_n*(v-xi)]) / G'(xi)
                + beta / G'(xi) * (1/2 - F_n*(v)) / F'(v) + R,

beta = F'(v-xi) - F'(v+xi). Linearising G_n*(MAD*) = 1/2 around (v, xi)
gives this sign, and it is the one that reproduces the off-diagonal
covariance term (1 - 4F(v-xi) + beta/F'(v)) and gamma; with the opposite
sign the remainder stays of order n**-1/2 for any asymmetric F.

The same linear term serves the almost-sure and the in-probability
statements; only the claimed rate of R differs, and that is checked
empirically by :mod:`madstrap.harness`.

The bound constants always use the model's analytic cdf. In the proof of
the MAD bound the empirical mass of [v-xi-eps/2, v+xi+eps/2] is written
both p_n and p_{n1}; the definition used here is
p_{n1} = F_n(v+xi+eps/2) - F_n((v-xi-eps/2)-).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bootstrap import BootstrapSample
from .distributions import DistributionModel, RobustParams
from .errors import DegenerateError, DomainError
from .estimators import (
    _check_index,
    batch_ecdf,
    batch_generalized,
    batch_med_mad,
    ecdf,
    generalized_mad,
    sample_mad,
    sample_median,
)

KINDS = ("median", "mad", "generalized_mad")


@dataclass(frozen=True)
class BahadurDecomposition:
    estimate: float
    target: float
    linear_term: float
    remainder: float
    n: int
    kind: str
    m: int | None = None
    l: int | None = None


@dataclass(frozen=True)
class ConcentrationBound:
    epsilon: float
    n: int
    a0: float
    b0: float
    c0: float | None
    d0: float | None
    delta: float
    Delta: float
    bound: float
    D_rate: float
    valid: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def med_linear_term(fn_star_at_v, params: RobustParams):
    if not params.fv > 0:
        raise DegenerateError("F'(v) must be positive")
    return (0.5 - fn_star_at_v) / params.fv


def mad_linear_term(fn_star_at_v, fn_star_hi, fn_star_lo, params: RobustParams):
    """Linear term of MAD* - xi from F_n* at v, v + xi and v - xi."""
    if not (params.g_prime > 0 and params.fv > 0):
        raise DegenerateError("F'(v) and G'(xi) must be positive")
    slope = params.beta / params.g_prime
    return (0.5 - (fn_star_hi - fn_star_lo)) / params.g_prime + slope * (0.5 - fn_star_at_v) / params.fv


def _check_kind(kind: str):
    if kind not in KINDS:
        raise DomainError(f"unknown estimator kind {kind!r}; expected one of {KINDS}")


def decompose(bs: BootstrapSample, params: RobustParams, kind: str = "mad", m: int = 1, l: int = 1) -> BahadurDecomposition:
    _check_kind(kind)
    data = bs.resampled
    fv_at = ecdf(data, params.v).value
    if kind == "median":
        estimate, target = sample_median(data), params.v
        linear = med_linear_term(fv_at, params)
    else:
        if kind == "mad":
            estimate = sample_mad(data)
        else:
            estimate = generalized_mad(data, m, l)
        target = params.xi
        hi = ecdf(data, params.v + params.xi).value
        lo = ecdf(data, params.v - params.xi).value
        linear = mad_linear_term(fv_at, hi, lo, params)
    remainder = (estimate - target) - linear
    gm = (m, l) if kind == "generalized_mad" else (None, None)
    return BahadurDecomposition(estimate, target, linear, remainder, data.n, kind, *gm)


def batch_decompose(rows: np.ndarray, params: RobustParams, kind: str = "mad", m: int = 1, l: int = 1):
    """Vectorised :func:`decompose` over sorted rows.

    Returns ``(estimate, target, linear_term, remainder)`` arrays.
    """
    _check_kind(kind)
    fv_at = batch_ecdf(rows, params.v)
    if kind == "median":
        estimate = batch_med_mad(rows)[0]
        target = params.v
        linear = med_linear_term(fv_at, params)
    else:
        if kind == "mad":
            estimate = batch_med_mad(rows)[1]
        else:
            estimate = batch_generalized(rows, m, l)[1]
        target = params.xi
        hi = batch_ecdf(rows, params.v + params.xi)
        lo = batch_ecdf(rows, params.v - params.xi)
        linear = mad_linear_term(fv_at, hi, lo, params)
    target_arr = np.full(rows.shape[0], target)
    return estimate, target_arr, linear, (estimate - target_arr) - linear


def rate_constant(params: RobustParams) -> float:
    """D = max(8 / F'(v), 8 / G'(xi))."""
    return max(8.0 / params.fv, 8.0 / params.g_prime)


def rate_envelope(params: RobustParams, n: int) -> float:
    """D * sqrt(log n / n), the almost-sure envelope for |(v* -/+ xi*) - (v -/+ xi)|."""
    return rate_constant(params) * math.sqrt(math.log(n) / n)


def _median_constants(model, params, n, l, epsilon):
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if n < 2:
        raise DomainError("n must be at least 2")
    _check_index("l", l, n)
    k = (n + l) // 2
    a0 = float(model.cdf(params.v + epsilon / 2)) - (k - 1) / n
    b0 = k / n - float(model.cdf(params.v - epsilon / 2))
    return a0, b0


def concentration_bound_median(model: DistributionModel, params: RobustParams, n: int, l: int, epsilon: float) -> ConcentrationBound:
    """Bound on P(|v*_{n,l} - v| > epsilon): 2 exp(-sqrt(2) n min(a0, b0)**2).

    When a0 or b0 is not positive the sample size is too small for the
    inequality to be claimed; the bound is then reported as 1 and ``valid``
    is False.
    """
    a0, b0 = _median_constants(model, params, n, l, epsilon)
    delta = min(a0, b0)
    valid = delta > 0
    bound = 2.0 * math.exp(-math.sqrt(2.0) * n * delta * delta) if valid else 1.0
    return ConcentrationBound(epsilon, n, a0, b0, None, None, delta, delta, bound, rate_constant(params), valid)


def concentration_bound_mad(model: DistributionModel, params: RobustParams, n: int, l: int, m: int, epsilon: float) -> ConcentrationBound:
    """Bound on P(|xi*_{n,m,l} - xi| > epsilon): 6 exp(-sqrt(2) n Delta**2)."""
    a0, b0 = _median_constants(model, params, n, l, epsilon)
    _check_index("m", m, n)
    km = (n + m) // 2
    v, xi, e2 = params.v, params.xi, epsilon / 2
    cdf = model.cdf
    c0 = float(cdf(v + xi + e2)) - float(cdf(v - xi - e2)) - (km - 1) / n
    d0 = km / n - float(cdf(v + xi - e2)) + float(cdf(v - xi + e2))
    delta = min(a0, b0)
    Delta = min(a0, b0, c0, d0)
    valid = Delta > 0
    bound = 6.0 * math.exp(-math.sqrt(2.0) * n * Delta * Delta) if valid else 1.0
    return ConcentrationBound(epsilon, n, a0, b0, c0, d0, delta, Delta, bound, rate_constant(params), valid)
