"""Population models and the robust constants derived from them.

Every family exposes an analytic cdf and pdf (never a finite difference) and
a quantile function, closed form where one exists. The limit results also assume
F is twice differentiable at v and v +/- xi; that second derivative is a
hypothesis only and is never evaluated here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize, special

from .errors import DomainError, ModelUnsupportedError
from .rng import Stream

FAMILIES = ("normal", "laplace", "cauchy", "uniform", "exponential", "contaminated_normal")

# parameter names and defaults, in constructor order
FAMILY_PARAMS: dict[str, tuple[tuple[str, float], ...]] = {
    "normal": (("mu", 0.0), ("sigma", 1.0)),
    "laplace": (("mu", 0.0), ("b", 1.0)),
    "cauchy": (("x0", 0.0), ("scale", 1.0)),
    "uniform": (("a", 0.0), ("b", 1.0)),
    "exponential": (("lam", 1.0),),
    "contaminated_normal": (("eps_c", 0.1), ("sigma_c", 3.0)),
}


@dataclass(frozen=True)
class DistributionModel:
    """A continuous univariate population F.

    Build instances with the family constructors (:func:`normal`,
    :func:`laplace`, ...) or :func:`make_model`; they validate parameters.
    """

    family: str
    params: tuple[float, ...]
    _cdf: Callable = field(repr=False, compare=False)
    _pdf: Callable = field(repr=False, compare=False)
    _ppf: Callable = field(repr=False, compare=False)
    mean: float = field(default=float("nan"), compare=False)
    symmetric: bool = field(default=False, compare=False)

    def cdf(self, x):
        return self._cdf(np.asarray(x, dtype=float))[()]

    def pdf(self, x):
        return self._pdf(np.asarray(x, dtype=float))[()]

    def quantile(self, p):
        return quantile(self, p)

    @property
    def param_dict(self) -> dict[str, float]:
        names = [k for k, _ in FAMILY_PARAMS[self.family]]
        return dict(zip(names, self.params))

    def describe(self) -> str:
        args = ",".join(f"{k}={v:g}" for k, v in self.param_dict.items())
        return f"{self.family}({args})"


def normal(mu: float = 0.0, sigma: float = 1.0) -> DistributionModel:
    _positive(sigma=sigma)
    return DistributionModel(
        "normal",
        (float(mu), float(sigma)),
        lambda x: special.ndtr((x - mu) / sigma),
        lambda x: np.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi)),
        lambda p: mu + sigma * special.ndtri(p),
        mean=float(mu),
        symmetric=True,
    )


def laplace(mu: float = 0.0, b: float = 1.0) -> DistributionModel:
    _positive(b=b)

    def cdf(x):
        z = (x - mu) / b
        return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))

    def ppf(p):
        lower = mu + b * np.log(2.0 * np.minimum(p, 0.5))
        upper = mu - b * np.log(2.0 * (1.0 - np.maximum(p, 0.5)))
        return np.where(p < 0.5, lower, upper)

    return DistributionModel(
        "laplace",
        (float(mu), float(b)),
        cdf,
        lambda x: np.exp(-np.abs(x - mu) / b) / (2.0 * b),
        ppf,
        mean=float(mu),
        symmetric=True,
    )


def cauchy(x0: float = 0.0, scale: float = 1.0) -> DistributionModel:
    _positive(scale=scale)
    return DistributionModel(
        "cauchy",
        (float(x0), float(scale)),
        lambda x: 0.5 + np.arctan((x - x0) / scale) / np.pi,
        lambda x: 1.0 / (np.pi * scale * (1.0 + ((x - x0) / scale) ** 2)),
        lambda p: x0 + scale * np.tan(np.pi * (p - 0.5)),
        symmetric=True,
    )


def uniform(a: float = 0.0, b: float = 1.0) -> DistributionModel:
    if not b > a:
        raise DomainError("uniform requires b > a")
    width = b - a
    return DistributionModel(
        "uniform",
        (float(a), float(b)),
        lambda x: np.clip((x - a) / width, 0.0, 1.0),
        lambda x: np.where((x >= a) & (x <= b), 1.0 / width, 0.0),
        lambda p: a + width * p,
        mean=0.5 * (a + b),
        symmetric=True,
    )


def exponential(lam: float = 1.0) -> DistributionModel:
    _positive(lam=lam)
    return DistributionModel(
        "exponential",
        (float(lam),),
        lambda x: np.where(x > 0, -np.expm1(-lam * np.maximum(x, 0.0)), 0.0),
        lambda x: np.where(x >= 0, lam * np.exp(-lam * np.maximum(x, 0.0)), 0.0),
        lambda p: -np.log1p(-p) / lam,
        mean=1.0 / lam,
    )


def contaminated_normal(eps_c: float = 0.1, sigma_c: float = 3.0) -> DistributionModel:
    """(1 - eps_c) N(0, 1) + eps_c N(0, sigma_c**2); symmetric about 0."""
    if not 0.0 <= eps_c < 1.0:
        raise DomainError("eps_c must lie in [0, 1)")
    _positive(sigma_c=sigma_c)

    def cdf(x):
        return (1.0 - eps_c) * special.ndtr(x) + eps_c * special.ndtr(x / sigma_c)

    def pdf(x):
        c = 1.0 / np.sqrt(2 * np.pi)
        return c * ((1.0 - eps_c) * np.exp(-0.5 * x * x) + eps_c / sigma_c * np.exp(-0.5 * (x / sigma_c) ** 2))

    def ppf(p):
        # the mixture quantile lies between the two component quantiles
        z = special.ndtri(p)
        lo = np.minimum(z, sigma_c * z)
        hi = np.maximum(z, sigma_c * z)
        return _vector_bisect(cdf, p, lo, hi)

    return DistributionModel(
        "contaminated_normal",
        (float(eps_c), float(sigma_c)),
        cdf,
        pdf,
        ppf,
        mean=0.0,
        symmetric=True,
    )


_CONSTRUCTORS = {
    "normal": normal,
    "laplace": laplace,
    "cauchy": cauchy,
    "uniform": uniform,
    "exponential": exponential,
    "contaminated_normal": contaminated_normal,
}


def make_model(family: str, **params: float) -> DistributionModel:
    """Construct a model by family name; unspecified parameters take defaults."""
    if family not in _CONSTRUCTORS:
        raise DomainError(f"unknown distribution family: {family!r}")
    allowed = {k for k, _ in FAMILY_PARAMS[family]}
    extra = set(params) - allowed
    if extra:
        raise DomainError(f"{family} does not take parameter(s) {sorted(extra)}")
    return _CONSTRUCTORS[family](**{k: float(v) for k, v in params.items()})


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise DomainError(f"{k} must be positive")


def _vector_bisect(cdf, p, lo, hi, iters=80):
    p = np.asarray(p, dtype=float)
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def quantile(model: DistributionModel, p):
    """inf{x : F(x) >= p} for p in the open unit interval."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("quantile requires 0 < p < 1")
    return model._ppf(arr)[()]


@dataclass(frozen=True)
class RobustParams:
    """Population median/MAD and the density constants built from them.

    ``cdf_lo`` is F(v - xi), which enters the off-diagonal covariance term.
    """

    v: float
    xi: float
    fv: float
    f_lo: float
    f_hi: float
    g_prime: float
    alpha: float
    beta: float
    gamma: float
    cdf_lo: float

    @classmethod
    def from_values(cls, v, xi, fv, f_lo, f_hi, cdf_lo, cdf_hi) -> "RobustParams":
        g_prime = f_lo + f_hi
        alpha = cdf_lo + cdf_hi
        beta = f_lo - f_hi
        gamma = beta * beta + 4.0 * (1.0 - alpha) * beta * fv
        return cls(v, xi, fv, f_lo, f_hi, g_prime, alpha, beta, gamma, cdf_lo)

    def as_dict(self) -> dict[str, float]:
        return {k: float(getattr(self, k)) for k in self.__dataclass_fields__}


def robust_params(model: DistributionModel) -> RobustParams:
    v = float(quantile(model, 0.5))
    upper = float(quantile(model, 0.9999)) - v

    def excess(t):
        return float(model.cdf(v + t) - model.cdf(v - t)) - 0.5

    if not upper > 0 or excess(upper) < 0:
        raise ModelUnsupportedError(f"cannot bracket the MAD of {model.describe()}")
    # bisection run past the 1e-12 width down to machine resolution
    xi = optimize.bisect(excess, 0.0, upper, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400)
    params = RobustParams.from_values(
        v,
        xi,
        float(model.pdf(v)),
        float(model.pdf(v - xi)),
        float(model.pdf(v + xi)),
        float(model.cdf(v - xi)),
        float(model.cdf(v + xi)),
    )
    if not (params.fv > 0 and params.g_prime > 0):
        raise ModelUnsupportedError(f"{model.describe()} has zero density at v or v +/- xi")
    return params


def sample_from_stream(model: DistributionModel, stream: Stream, n: int) -> np.ndarray:
    """Quantile transform of the next ``n`` open-interval uniforms of ``stream``."""
    return np.asarray(model._ppf(stream.uniforms(n)), dtype=float)


def draw_sample(model: DistributionModel, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws; identical (model, n, seed) gives identical bytes."""
    if n < 1:
        raise DomainError("sample size must be at least 1")
    return sample_from_stream(model, Stream(seed), n)
