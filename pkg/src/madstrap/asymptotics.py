"""Limit covariance of sqrt(n) (Med* - v, MAD* - xi) and a check against it."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .distributions import RobustParams
from .errors import DegenerateError, DomainError

# asymptotic Kolmogorov 1% critical value, multiplied by 1/sqrt(reps)
KS_CRIT_1PCT = 1.63


@dataclass(frozen=True)
class SigmaMatrix:
    s11: float
    s12: float
    s22: float
    params_used: RobustParams | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.s11 > 0 and self.s22 > 0 and self.s11 * self.s22 - self.s12**2 > 0):
            raise DegenerateError("covariance matrix is not positive definite")

    def as_array(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s12, self.s22]])

    def scaled(self, factor: float) -> "SigmaMatrix":
        return replace(self, s11=self.s11 * factor, s12=self.s12 * factor, s22=self.s22 * factor)


def sigma_matrix(params: RobustParams) -> SigmaMatrix:
    fv, g = params.fv, params.g_prime
    if not (fv > 0 and g > 0):
        raise DegenerateError("F'(v) and G'(xi) must be positive")
    s11 = 1.0 / (2.0 * fv * fv)
    s12 = (1.0 - 4.0 * params.cdf_lo + params.beta / fv) / (2.0 * fv * g)
    s22 = (1.0 + params.gamma / (fv * fv)) / (2.0 * g * g)
    return SigmaMatrix(s11, s12, s22, params)


@dataclass(frozen=True)
class NormalityThresholds:
    diag_rel: float = 0.05
    offdiag_abs: float = 0.05
    ks_coef: float = KS_CRIT_1PCT
    min_reps: int = 100


@dataclass(frozen=True)
class NormalityReport:
    n: int | None
    reps: int
    emp_cov: tuple[tuple[float, float], tuple[float, float]]
    target_cov: tuple[tuple[float, float], tuple[float, float]]
    rel_diag_err: tuple[float, float]
    mean_offset: tuple[float, float]
    max_rel_diag_err: float
    abs_offdiag_err: float
    ks_stat_1: float
    ks_stat_2: float
    ks_critical: float
    thresholds: NormalityThresholds
    pass_diag: bool
    pass_offdiag: bool
    pass_ks: bool

    @property
    def passed(self) -> bool:
        return self.pass_diag and self.pass_offdiag and self.pass_ks

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "thresholds"}
        d["emp_cov"] = [list(r) for r in self.emp_cov]
        d["target_cov"] = [list(r) for r in self.target_cov]
        d["rel_diag_err"] = list(self.rel_diag_err)
        d["mean_offset"] = list(self.mean_offset)
        d["thresholds"] = dict(self.thresholds.__dict__)
        d["pass"] = self.passed
        return d


def joint_normality_check(draws, sigma: SigmaMatrix, thresholds: NormalityThresholds = NormalityThresholds(), n: int | None = None) -> NormalityReport:
    """Compare scaled pairs sqrt(n) (Med* - v, MAD* - xi) with N(0, sigma).

    Scale is judged by the covariance errors; the KS statistics judge shape,
    on marginals standardised by their own mean and standard deviation. The
    means are reported as ``mean_offset`` (in target standard deviations)
    because the O(1/n) bias of the MAD is visible at this resolution.
    """
    z = np.asarray(draws, dtype=float)
    if z.ndim != 2 or z.shape[1] != 2:
        raise DomainError("draws must have shape (reps, 2)")
    reps = z.shape[0]
    if reps < thresholds.min_reps:
        raise DomainError(f"need at least {thresholds.min_reps} draws, got {reps}")
    emp = np.cov(z, rowvar=False)
    emp = 0.5 * (emp + emp.T)
    rel = (abs(emp[0, 0] - sigma.s11) / sigma.s11, abs(emp[1, 1] - sigma.s22) / sigma.s22)
    off = abs(emp[0, 1] - sigma.s12)
    mu = z.mean(axis=0)
    sd = z.std(axis=0, ddof=1)
    ks1 = stats.kstest((z[:, 0] - mu[0]) / sd[0], "norm").statistic
    ks2 = stats.kstest((z[:, 1] - mu[1]) / sd[1], "norm").statistic
    crit = thresholds.ks_coef / math.sqrt(reps)
    return NormalityReport(
        n=n,
        reps=reps,
        emp_cov=((float(emp[0, 0]), float(emp[0, 1])), (float(emp[1, 0]), float(emp[1, 1]))),
        target_cov=((sigma.s11, sigma.s12), (sigma.s12, sigma.s22)),
        rel_diag_err=(float(rel[0]), float(rel[1])),
        mean_offset=(float(mu[0] / math.sqrt(sigma.s11)), float(mu[1] / math.sqrt(sigma.s22))),
        max_rel_diag_err=float(max(rel)),
        abs_offdiag_err=float(off),
        ks_stat_1=float(ks1),
        ks_stat_2=float(ks2),
        ks_critical=crit,
        thresholds=thresholds,
        pass_diag=bool(max(rel) <= thresholds.diag_rel),
        pass_offdiag=bool(off <= thresholds.offdiag_abs),
        pass_ks=bool(ks1 < crit and ks2 < crit),
    )
