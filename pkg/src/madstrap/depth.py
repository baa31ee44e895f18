"""Projection depth and the projection depth weighted mean (PWM).

PD(x; center, scale) = 1 / (1 + |x - center| / scale), and

    PWM(F) = int x w(PD(x, F)) dF(x) / int w(PD(x, F)) dF(x)

with (center, scale) = (median, MAD) of F, of F_n or of F_n*.

Population integrals are computed after the substitution u = F(x), with a
fixed Gauss-Legendre rule on panels whose ends are the images of the kink
points v - xi, v, v + xi, plus a geometric grading towards u = 0 and u = 1
to absorb the endpoint behaviour of x(u). Nodes are interior, so the
indicator jumps in the influence kernel are never evaluated on a boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bootstrap import ResamplePlan, resample
from .distributions import DistributionModel, RobustParams
from .errors import DegenerateError, DomainError, IntegrabilityError
from .estimators import _as_sorted, batch_med_mad, batch_median, modified_mad, sample_mad, sample_median

DEFAULT_NODES = 256
# heavy-tailed families need w(PD(x)) to decay at least like |x|**-3
MIN_TAIL_ORDER = {"cauchy": 3.0}


@dataclass(frozen=True)
class WeightFunction:
    """A weight w on [0, 1] with w(0) = 0, continuously differentiable.

    ``power(p)``: w(r) = r**p, p >= 1.
    ``zuo(k, c)``: w(r) = (exp(-k (1 - r/c)**2) - exp(-k)) / (1 - exp(-k)) for
    r < c and 1 for r >= c.
    """

    kind: str = "power"
    p: float = 2.0
    k: float = 3.0
    c: float = 1.0

    def __post_init__(self):
        if self.kind == "power":
            if not self.p >= 1:
                raise DomainError("power weight needs p >= 1")
        elif self.kind == "zuo":
            if not (self.k > 0 and 0 < self.c <= 1):
                raise DomainError("zuo weight needs k > 0 and 0 < c <= 1")
        else:
            raise DomainError(f"unknown weight kind {self.kind!r}")

    @classmethod
    def power(cls, p: float = 2.0) -> "WeightFunction":
        return cls("power", p=float(p))

    @classmethod
    def zuo(cls, k: float = 3.0, c: float = 1.0) -> "WeightFunction":
        return cls("zuo", k=float(k), c=float(c))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            return (r**self.p)[()]
        ek = math.exp(-self.k)
        t = np.minimum(r / self.c, 1.0)
        return ((np.exp(-self.k * (1.0 - t) ** 2) - ek) / (1.0 - ek))[()]

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            return (self.p * r ** (self.p - 1.0))[()]
        ek = math.exp(-self.k)
        t = np.minimum(r / self.c, 1.0)
        return (np.exp(-self.k * (1.0 - t) ** 2) * 2.0 * self.k * (1.0 - t) / (self.c * (1.0 - ek)))[()]

    @property
    def tail_order(self) -> float:
        """Exponent q with w(PD(x)) ~ |x|**-q as |x| grows."""
        return self.p if self.kind == "power" else 1.0

    def as_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "p": self.p}
        return {"kind": "zuo", "k": self.k, "c": self.c}


@dataclass(frozen=True)
class DepthParams:
    center: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DegenerateError("depth scale must be positive")


@dataclass(frozen=True)
class PwmResult:
    value: float
    numerator: float
    denominator: float
    weights_used: dict


def projection_depth(x, dp: DepthParams):
    return (1.0 / (1.0 + np.abs(np.asarray(x, dtype=float) - dp.center) / dp.scale))[()]


# -- population quantities ---------------------------------------------------

@lru_cache(maxsize=64)
def _dF_rule(model: DistributionModel, v: float, xi: float, nodes: int):
    """Nodes x_i and weights so that sum(wt * g(x)) ~ int g dF."""
    cuts = {float(model.cdf(v - xi)), float(model.cdf(v)), float(model.cdf(v + xi))}
    grading = [10.0**-j for j in range(1, 15)]
    lo_edge, hi_edge = min(cuts), max(cuts)
    cuts |= {g for g in grading if g < lo_edge}
    cuts |= {1.0 - g for g in grading if 1.0 - g > hi_edge}
    edges = np.array(sorted({0.0, 1.0} | {c for c in cuts if 0.0 < c < 1.0}))
    t, wt = np.polynomial.legendre.leggauss(nodes)
    us, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        us.append(0.5 * (b - a) * t + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * wt)
    u = np.concatenate(us)
    w = np.concatenate(ws)
    inside = (u > 0.0) & (u < 1.0)
    x = np.asarray(model._ppf(u[inside]), dtype=float)
    return x, w[inside]


def _check_integrable(model: DistributionModel, w: WeightFunction):
    need = MIN_TAIL_ORDER.get(model.family)
    if need is not None and w.tail_order < need:
        raise IntegrabilityError(
            f"{model.family} with weight {w.as_dict()} is not supported: w(PD) must decay like |x|^-{need:g}"
        )


def pwm_population(model: DistributionModel, w: WeightFunction, params: RobustParams, nodes: int = DEFAULT_NODES) -> PwmResult:
    _check_integrable(model, w)
    x, wt = _dF_rule(model, params.v, params.xi, nodes)
    wx = w(projection_depth(x, DepthParams(params.v, params.xi)))
    num = float(np.dot(wt, x * wx))
    den = float(np.dot(wt, wx))
    if not den > 0:
        raise DegenerateError("weight integral is zero")
    return PwmResult(num / den, num, den, {"nodes": int(x.size)})


def influence_f(x, y, params: RobustParams):
    """PD(x, F_n*) - PD(x, F) ~ mean over i of f(x, X_i*); sign(0) = 0.

    The MAD part enters with slope beta / G'(xi), the same as in
    :func:`madstrap.bahadur.mad_linear_term`.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v, xi = params.v, params.xi
    d = np.abs(x - v)
    denom = (xi + d) ** 2
    in_band = ((v - xi < y) & (y <= v + xi)).astype(float)
    below = (y <= v).astype(float)
    first = d / denom * (0.5 - in_band) / params.g_prime
    slope = params.beta
    second = (d * slope / (params.g_prime * denom) + xi * np.sign(x - v) / denom) * (0.5 - below) / params.fv
    return (first + second)[()]


def _half_indicator(mask_open, on_edge):
    # indicator with value 1/2 exactly on a jump point (mean of the one-sided limits)
    return np.where(on_edge, 0.5, mask_open.astype(float))


@dataclass(frozen=True)
class InfluenceKernel:
    """K(x) for a fixed (model, w).

    The inner integral of (y - PWM(F)) w'(PD(y)) f(y, x) dF(y) depends on x
    only through I(v - xi < x <= v + xi) and I(x <= v), so it is carried by
    the two constants ``band_coef`` and ``below_coef``. At the jump points
    x = v and x = v +/- xi the indicators take the value 1/2.
    """

    params: RobustParams
    weight: WeightFunction
    pwm0: float
    denominator: float
    band_coef: float
    below_coef: float

    def inner(self, x):
        x = np.asarray(x, dtype=float)
        v, xi = self.params.v, self.params.xi
        band = _half_indicator((v - xi < x) & (x <= v + xi), (x == v - xi) | (x == v + xi))
        below = _half_indicator(x <= v, x == v)
        return (self.band_coef * (0.5 - band) / self.params.g_prime + self.below_coef * (0.5 - below) / self.params.fv)[()]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pd = projection_depth(x, DepthParams(self.params.v, self.params.xi))
        return ((self.inner(x) + (x - self.pwm0) * self.weight(pd)) / self.denominator)[()]


def influence_kernel(model: DistributionModel, w: WeightFunction, params: RobustParams, nodes: int = DEFAULT_NODES) -> InfluenceKernel:
    pop = pwm_population(model, w, params, nodes)
    y, wt = _dF_rule(model, params.v, params.xi, nodes)
    v, xi = params.v, params.xi
    d = np.abs(y - v)
    denom = (xi + d) ** 2
    lead = (y - pop.value) * w.derivative(projection_depth(y, DepthParams(v, xi)))
    band_part = d / denom
    below_part = d * params.beta / (params.g_prime * denom) + xi * np.sign(y - v) / denom
    return InfluenceKernel(
        params,
        w,
        pop.value,
        pop.denominator,
        float(np.dot(wt, lead * band_part)),
        float(np.dot(wt, lead * below_part)),
    )


def influence_K(x, model: DistributionModel, w: WeightFunction, params: RobustParams, pwm0: float | None = None, nodes: int = DEFAULT_NODES):
    kern = influence_kernel(model, w, params, nodes)
    if pwm0 is not None and not math.isclose(pwm0, kern.pwm0, rel_tol=1e-9, abs_tol=1e-12):
        raise DomainError("pwm0 does not match the population PWM of this model and weight")
    return kern(x)


def kernel_moments(model: DistributionModel, w: WeightFunction, params: RobustParams, nodes: int = DEFAULT_NODES) -> tuple[float, float]:
    """(int K dF, int K**2 dF)."""
    kern = influence_kernel(model, w, params, nodes)
    x, wt = _dF_rule(model, params.v, params.xi, nodes)
    k = kern(x)
    return float(np.dot(wt, k)), float(np.dot(wt, k * k))


def pwm_asym_variance(model: DistributionModel, w: WeightFunction, params: RobustParams, nodes: int = DEFAULT_NODES) -> float:
    """2 var[K(X)], the limit variance of sqrt(n) (PWM(F_n*) - PWM(F))."""
    m1, m2 = kernel_moments(model, w, params, nodes)
    var = m2 - m1 * m1
    if not math.isfinite(var):
        raise IntegrabilityError("var K(X) did not evaluate to a finite number")
    return 2.0 * max(var, 0.0)


# -- sample and bootstrap versions ------------------------------------------

def _weighted(values: np.ndarray, center: float, scale: float, w: WeightFunction) -> PwmResult:
    if not scale > 0:
        raise DegenerateError("scale is zero: all mass at one point")
    wts = w(projection_depth(values, DepthParams(center, scale)))
    num = float(np.dot(wts, values))
    den = float(np.sum(wts))
    return PwmResult(num / den, num, den, {"min": float(wts.min()), "max": float(wts.max()), "sum": den})


def pwm_sample(s, w: WeightFunction = WeightFunction()) -> PwmResult:
    """Weighted sums run over the sorted values, so the result depends on
    the multiset only, not on the order of the observations."""
    s = _as_sorted(s)
    return _weighted(s.sorted, sample_median(s), sample_mad(s), w)


def pwm_bootstrap(s, plan: ResamplePlan, w: WeightFunction = WeightFunction()) -> PwmResult:
    """PWM of one bootstrap resample; raises DegenerateError when MAD* = 0."""
    return pwm_sample(resample(s, plan).resampled, w)


def modified_mad_pwm(s, k: int, w: WeightFunction = WeightFunction()) -> PwmResult:
    s = _as_sorted(s)
    return _weighted(s.sorted, sample_median(s), modified_mad(s, k), w)


def batch_pwm(rows: np.ndarray, w: WeightFunction = WeightFunction(), k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """PWM per sorted row; returns (values, valid) with NaN where the scale is 0.

    ``k`` switches the scale from MAD to the modified MAD with index k.
    """
    if k is None:
        med, mad = batch_med_mad(rows)
    else:
        n = rows.shape[1]
        if not 1 <= k <= n - 1:
            raise DomainError(f"k={k} must satisfy 1 <= k <= n-1")
        med = batch_median(rows)
        dev = np.sort(np.abs(rows - med[:, None]), axis=1)
        mad = 0.5 * (dev[:, (n + k) // 2 - 1] + dev[:, (n + k + 1) // 2 - 1])
    valid = mad > 0
    safe = np.where(valid, mad, 1.0)
    wts = w(1.0 / (1.0 + np.abs(rows - med[:, None]) / safe[:, None]))
    vals = np.einsum("ij,ij->i", wts, rows) / wts.sum(axis=1)
    return np.where(valid, vals, np.nan), valid
