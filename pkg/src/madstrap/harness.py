"""Declarative Monte Carlo experiments with deterministic, parallel replicates.

Each (n, replicate_index) owns the random stream
``Stream(hash64(master_seed, n, replicate_index))``; the outer sample takes
the first n raw outputs and bootstrap indices the ones after that. Results
therefore do not depend on chunking or on the number of worker processes,
and rows are always emitted sorted by (n, replicate_index).

In ``pwm_variance`` the linear term is mean K(X_i*) - E K(X); aux3 holds
sqrt(n) (mean K(X_i*) - mean K(X_i)), the same sum centred by the mean of K
over the observed sample (conditional centring).

In ``conditional_normality`` the fixed outer sample for each n comes from
``hash64(master_seed, n, CONDITIONAL_TAG)``; replicate streams then supply
only bootstrap indices.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import bahadur
from .asymptotics import NormalityThresholds, joint_normality_check, sigma_matrix
from .depth import WeightFunction, batch_pwm, influence_kernel, kernel_moments, pwm_asym_variance, pwm_population
from .distributions import FAMILY_PARAMS, DistributionModel, make_model, robust_params
from .errors import ConfigError, DomainError, MadstrapError
from .estimators import batch_ecdf, batch_generalized, batch_med_mad
from .rng import Stream, bounded, hash64, open_uniform

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXPERIMENTS = ("bahadur_rate", "bound_check", "joint_normality", "conditional_normality", "pwm_variance", "ci_coverage")
CSV_COLUMNS = (
    "experiment", "dist", "n", "replicate_index", "seed_used", "estimate", "target",
    "linear_term", "remainder", "skipped", "aux1", "aux2", "aux3", "aux4",
)
CONDITIONAL_TAG = (1 << 64) - 1
STRONG_BAND = (-0.95, -0.55)
WEAK_FACTOR = 2.0
# cap on doubles held per simulated chunk
CHUNK_DOUBLES = 1 << 21


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    family: str
    dist_params: tuple[tuple[str, float], ...]
    n_grid: tuple[int, ...]
    reps: int
    master_seed: int
    estimator: str = "mad"
    bootstrap_B: int = 1000
    weight: WeightFunction = WeightFunction()
    epsilon: float | None = None
    l: int = 1
    m: int = 1
    k: int | None = None
    ci_level: float = 0.95
    csv_path: str | None = None
    summary_path: str | None = None
    record_runtime: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        try:
            self.model()
        except DomainError as exc:
            raise ConfigError("distribution", str(exc)) from exc
        if not self.n_grid:
            raise ConfigError("n_grid", "must be nonempty")
        if any(int(n) != n or n < 2 for n in self.n_grid):
            raise ConfigError("n_grid", "entries must be integers >= 2")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise ConfigError("n_grid", "must be strictly ascending")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError("reps", "must be a positive integer")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed", "must fit in 64 bits")
        if self.estimator not in bahadur.KINDS:
            raise ConfigError("estimator", f"expected one of {bahadur.KINDS}")
        if not 0.0 < self.ci_level < 1.0:
            raise ConfigError("ci_level", "must lie in (0, 1)")
        for name in ("l", "m"):
            if getattr(self, name) < 1 or getattr(self, name) > min(self.n_grid) // 2:
                raise ConfigError(name, "must satisfy 1 <= value <= floor(min(n_grid)/2)")
        if self.experiment == "bound_check" and not (self.epsilon is not None and self.epsilon > 0):
            raise ConfigError("epsilon", "bound_check needs epsilon > 0")
        if self.experiment == "ci_coverage" and self.bootstrap_B < 500:
            raise ConfigError("bootstrap_B", "ci_coverage needs bootstrap_B >= 500")
        if self.experiment == "joint_normality" or self.experiment == "conditional_normality":
            if self.reps < NormalityThresholds().min_reps:
                raise ConfigError("reps", "normality checks need at least 100 replicates")

    def model(self) -> DistributionModel:
        return make_model(self.family, **dict(self.dist_params))

    @classmethod
    def from_mapping(cls, doc: dict) -> "ExperimentConfig":
        """Build from the TOML layout; unknown tables or keys are rejected."""
        allowed = {
            "experiment": {"name", "n_grid", "reps", "master_seed", "estimator", "bootstrap_B",
                           "epsilon", "l", "m", "k", "ci_level"},
            "distribution": {"family"},
            "weight": {"kind", "p", "k", "c"},
            "output": {"csv", "summary", "record_runtime"},
        }
        for table in doc:
            if table not in allowed:
                raise ConfigError(table, "unknown table")
        dist = dict(doc.get("distribution", {}))
        family = dist.get("family")
        if family is None:
            raise ConfigError("distribution.family", "required")
        if family in FAMILY_PARAMS:
            allowed["distribution"] |= {k for k, _ in FAMILY_PARAMS[family]}
        for table, keys in doc.items():
            if not isinstance(keys, dict):
                raise ConfigError(table, "must be a table")
            for key in keys:
                if key not in allowed[table]:
                    raise ConfigError(f"{table}.{key}", "unknown key")
        exp = doc.get("experiment", {})
        for req in ("name", "n_grid", "reps", "master_seed"):
            if req not in exp:
                raise ConfigError(f"experiment.{req}", "required")
        wdoc = dict(doc.get("weight", {"kind": "power", "p": 2.0}))
        try:
            weight = WeightFunction(
                wdoc.get("kind", "power"),
                p=float(wdoc.get("p", 2.0)),
                k=float(wdoc.get("k", 3.0)),
                c=float(wdoc.get("c", 1.0)),
            )
        except DomainError as exc:
            raise ConfigError("weight", str(exc)) from exc
        out = doc.get("output", {})
        params = tuple(sorted((k, float(v)) for k, v in dist.items() if k != "family"))
        try:
            return cls(
                experiment=exp["name"],
                family=family,
                dist_params=params,
                n_grid=tuple(int(n) for n in exp["n_grid"]),
                reps=int(exp["reps"]),
                master_seed=int(exp["master_seed"]),
                estimator=exp.get("estimator", "mad"),
                bootstrap_B=int(exp.get("bootstrap_B", 1000)),
                weight=weight,
                epsilon=None if exp.get("epsilon") is None else float(exp["epsilon"]),
                l=int(exp.get("l", 1)),
                m=int(exp.get("m", 1)),
                k=None if exp.get("k") is None else int(exp["k"]),
                ci_level=float(exp.get("ci_level", 0.95)),
                csv_path=out.get("csv"),
                summary_path=out.get("summary"),
                record_runtime=bool(out.get("record_runtime", False)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("experiment", str(exc)) from exc

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError("config", f"{path}: no such file") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("config", f"{path}: {exc}") from exc
        return cls.from_mapping(doc)

    def echo(self) -> dict:
        d = asdict(self)
        d["dist_params"] = dict(self.dist_params)
        d["n_grid"] = list(self.n_grid)
        d["weight"] = self.weight.as_dict()
        return d


@dataclass(frozen=True)
class ReplicateRecord:
    n: int
    replicate_index: int
    seed_used: int
    estimate: float | None
    target: float | None
    linear_term: float | None = None
    remainder: float | None = None
    skipped: bool = False
    aux: tuple = (None, None, None, None)


@dataclass
class ResultSet:
    config: ExperimentConfig
    rows: list[ReplicateRecord]
    runtime_seconds: float | None = None
    summary: dict | None = field(default=None, repr=False)


# -- replicate simulation ------------------------------------------------------

def _outer_and_indices(model, n, seeds, n_index_rows=1):
    """Outer samples (R, n) and bootstrap indices (R, n_index_rows, n)."""
    raws = np.empty((len(seeds), n * (1 + n_index_rows)), dtype=np.uint64)
    for r, seed in enumerate(seeds):
        raws[r] = Stream(seed).raw(raws.shape[1])
    x = np.asarray(model._ppf(open_uniform(raws[:, :n])), dtype=float)
    idx = bounded(raws[:, n:], n).reshape(len(seeds), n_index_rows, n)
    return x, idx


def _resampled_sorted(x, idx):
    return np.sort(np.take_along_axis(x, idx, axis=1), axis=1)


def _f(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _chunk(cfg: ExperimentConfig, n: int, start: int, count: int) -> list[ReplicateRecord]:
    model = cfg.model()
    params = robust_params(model)
    reps = range(start, start + count)
    seeds = [hash64(cfg.master_seed, n, r) for r in reps]
    exp = cfg.experiment
    rows: list[ReplicateRecord] = []

    if exp == "conditional_normality":
        base = Stream(hash64(cfg.master_seed, n, CONDITIONAL_TAG))
        x0 = np.asarray(model._ppf(base.uniforms(n)), dtype=float)
        med0, mad0 = (float(a[0]) for a in batch_med_mad(np.sort(x0)[None, :]))
        idx = np.stack([Stream(s).indices(n, n) for s in seeds])
        bs = np.sort(x0[idx], axis=1)
        med, mad = batch_med_mad(bs)
        rt = math.sqrt(n)
        for j, r in enumerate(reps):
            rows.append(ReplicateRecord(n, r, seeds[j], float(med[j]), med0, skipped=False,
                                        aux=(float(mad[j]), mad0, rt * (med[j] - med0), rt * (mad[j] - mad0))))
        return rows

    if exp == "ci_coverage":
        return _ci_chunk(cfg, model, params, n, reps, seeds)

    x, idx = _outer_and_indices(model, n, seeds)
    bs = _resampled_sorted(x, idx[:, 0, :])

    if exp == "bahadur_rate":
        est, tgt, lin, rem = bahadur.batch_decompose(bs, params, cfg.estimator, cfg.m, cfg.l)
        at_v = batch_ecdf(bs, params.v)
        band = batch_ecdf(bs, params.v + params.xi) - batch_ecdf(bs, params.v - params.xi)
        for j, r in enumerate(reps):
            rows.append(ReplicateRecord(n, r, seeds[j], float(est[j]), float(tgt[j]), float(lin[j]), float(rem[j]),
                                        aux=(float(at_v[j]), float(band[j]), None, None)))
    elif exp == "bound_check":
        center, xi_hat = batch_generalized(bs, cfg.m, cfg.l)
        if cfg.estimator == "median":
            est, tgt = center, params.v
        else:
            est, tgt = xi_hat, params.xi
        exceed = np.abs(est - tgt) > cfg.epsilon
        for j, r in enumerate(reps):
            rows.append(ReplicateRecord(n, r, seeds[j], float(est[j]), float(tgt), aux=(float(exceed[j]), None, None, None)))
    elif exp == "joint_normality":
        med, mad = batch_med_mad(bs)
        rt = math.sqrt(n)
        for j, r in enumerate(reps):
            rows.append(ReplicateRecord(n, r, seeds[j], float(med[j]), params.v,
                                        aux=(float(mad[j]), params.xi, rt * (med[j] - params.v), rt * (mad[j] - params.xi))))
    elif exp == "pwm_variance":
        pwm0 = pwm_population(model, cfg.weight, params).value
        star, ok = batch_pwm(bs, cfg.weight, cfg.k)
        base, ok0 = batch_pwm(np.sort(x, axis=1), cfg.weight, cfg.k)
        rt = math.sqrt(n)
        if cfg.k is None:
            # linear term mean K(X*) - E K(X); aux3 centres by the observed-sample mean of K
            kern = influence_kernel(model, cfg.weight, params)
            k_mean = kernel_moments(model, cfg.weight, params)[0]
            k_star = kern(bs).mean(axis=1)
            k_obs = kern(x).mean(axis=1)
        for j, r in enumerate(reps):
            if not ok[j]:
                rows.append(ReplicateRecord(n, r, seeds[j], None, pwm0, skipped=True, aux=(None, _f(base[j]), None, None)))
                continue
            if cfg.k is None:
                lin = float(k_star[j] - k_mean)
                rows.append(ReplicateRecord(n, r, seeds[j], float(star[j]), pwm0, lin, float(star[j] - pwm0) - lin,
                                            aux=(rt * (star[j] - pwm0), _f(base[j]), rt * (k_star[j] - k_obs[j]), None)))
            else:
                rows.append(ReplicateRecord(n, r, seeds[j], float(star[j]), pwm0,
                                            aux=(rt * (star[j] - pwm0), _f(base[j]), None, None)))
    return rows


def percentile_interval(values: np.ndarray, level: float) -> tuple[float, float]:
    """Equal-tailed percentile interval (linear interpolation between order statistics)."""
    a = (1.0 - level) / 2.0
    lo, hi = np.quantile(values, [a, 1.0 - a])
    return float(lo), float(hi)


def t_interval(x: np.ndarray, level: float) -> tuple[float, float]:
    n = x.size
    half = stats.t.ppf(0.5 + level / 2.0, n - 1) * x.std(ddof=1) / math.sqrt(n)
    mu = float(x.mean())
    return mu - half, mu + half


def _ci_chunk(cfg, model, params, n, reps, seeds):
    pwm0 = pwm_population(model, cfg.weight, params).value
    B = cfg.bootstrap_B
    rows = []
    for j, r in enumerate(reps):
        x, idx = _outer_and_indices(model, n, [seeds[j]], n_index_rows=B)
        sample = x[0]
        est, ok0 = batch_pwm(np.sort(sample)[None, :], cfg.weight, cfg.k)
        star, ok = batch_pwm(np.sort(sample[idx[0]], axis=1), cfg.weight, cfg.k)
        t_lo, t_hi = t_interval(sample, cfg.ci_level)
        # fewer than half the bootstrap replicates usable: treat the outer replicate as degenerate
        if not ok0[0] or ok.sum() < B // 2:
            rows.append(ReplicateRecord(n, r, seeds[j], _f(est[0]), pwm0, skipped=True, aux=(None, None, t_lo, t_hi)))
            continue
        lo, hi = percentile_interval(star[ok], cfg.ci_level)
        rows.append(ReplicateRecord(n, r, seeds[j], float(est[0]), pwm0, aux=(lo, hi, t_lo, t_hi)))
    return rows


def _chunks(cfg: ExperimentConfig):
    for n in cfg.n_grid:
        if cfg.experiment == "ci_coverage":
            size = max(1, min(cfg.reps, 64))
        else:
            size = max(1, min(cfg.reps, CHUNK_DOUBLES // (2 * n)))
        for start in range(0, cfg.reps, size):
            yield n, start, min(size, cfg.reps - start)


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("MADSTRAP_WORKERS", "").strip()
        try:
            workers = int(env, 10) if env else 1
        except ValueError:
            raise ConfigError("MADSTRAP_WORKERS", f"not an integer: {env!r}") from None
    if workers < 1:
        raise ConfigError("workers", "must be at least 1")
    return workers


def run_experiment(cfg: ExperimentConfig, workers: int | None = None, write: bool = True) -> ResultSet:
    """Run every (n, replicate) of ``cfg``; persist CSV and summary if paths are set."""
    workers = resolve_workers(workers)
    t0 = time.perf_counter()
    tasks = list(_chunks(cfg))
    if workers == 1:
        parts = [_chunk(cfg, *t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk, [cfg] * len(tasks), *zip(*tasks)))
    rows = sorted((row for part in parts for row in part), key=lambda r: (r.n, r.replicate_index))
    result = ResultSet(cfg, rows, time.perf_counter() - t0)
    result.summary = summarize(result)
    if write:
        if cfg.csv_path:
            write_csv(result, cfg.csv_path)
        if cfg.summary_path:
            write_summary(result.summary, cfg.summary_path)
    return result


# -- persistence -----------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def dist_label(cfg: ExperimentConfig) -> str:
    return cfg.family + "(" + ";".join(f"{k}={v:.17g}" for k, v in cfg.dist_params) + ")"


def csv_text(result: ResultSet) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    label = dist_label(result.config)
    for row in result.rows:
        writer.writerow([
            result.config.experiment, label, row.n, row.replicate_index, row.seed_used,
            _fmt(row.estimate), _fmt(row.target), _fmt(row.linear_term), _fmt(row.remainder),
            _fmt(row.skipped), *(_fmt(a) for a in row.aux),
        ])
    return buf.getvalue()


def write_csv(result: ResultSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(result))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def summary_json(summary: dict) -> str:
    return json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n"


def write_summary(summary: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(summary_json(summary))


# -- summaries ---------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    ns: tuple[int, ...]
    medians: tuple[float, ...]
    slope: float | None
    intercept: float | None
    scaled_half: tuple[float, ...]
    scaled_strong: tuple[float, ...]
    weak_ratio: float | None
    weak_pass: bool
    strong_pass: bool
    degenerate: bool
    strong_band: tuple[float, float] = STRONG_BAND
    weak_factor: float = WEAK_FACTOR

    def as_dict(self) -> dict:
        return asdict(self)


def rate_fit(ns, medians) -> RateFit:
    """Log-log OLS of median |R_n| on n plus the two scaled sequences.

    weak pass: sqrt(n) * median|R_n| falls by at least ``WEAK_FACTOR`` from
    the smallest to the largest n. strong pass: slope inside ``STRONG_BAND``
    (the band absorbs the log n factor, which a slope cannot separate).
    """
    ns = tuple(int(n) for n in ns)
    med = tuple(float(m) for m in medians)
    if len(ns) < 4 or len(ns) != len(med):
        raise DomainError("rate fit needs at least 4 grid points")
    if any(not m > 0 for m in med):
        return RateFit(ns, med, None, None, (), (), None, False, False, True)
    lx = np.log(np.array(ns, dtype=float))
    ly = np.log(np.array(med))
    xc = lx - lx.mean()
    slope = float(np.dot(xc, ly - ly.mean()) / np.dot(xc, xc))
    intercept = float(ly.mean() - slope * lx.mean())
    half = tuple(math.sqrt(n) * m for n, m in zip(ns, med))
    strong = tuple(n**0.75 * m / math.log(n) for n, m in zip(ns, med))
    ratio = half[0] / half[-1]
    return RateFit(ns, med, slope, intercept, half, strong, ratio,
                   ratio >= WEAK_FACTOR, STRONG_BAND[0] <= slope <= STRONG_BAND[1], False)


def _stats(values) -> dict:
    a = np.array([v for v in values if v is not None], dtype=float)
    if a.size == 0:
        return {"count": 0, "mean": None, "median": None, "var": None}
    return {
        "count": int(a.size),
        "mean": float(a.mean()),
        "median": float(np.median(a)),
        "var": float(a.var(ddof=1)) if a.size > 1 else None,
    }


def summarize(result: ResultSet) -> dict:
    """Per-n statistics, experiment-specific checks and pass/fail flags."""
    cfg = result.config
    if not result.rows:
        raise DomainError("cannot summarise an empty result set")
    model = cfg.model()
    params = robust_params(model)
    by_n: dict[int, list[ReplicateRecord]] = {}
    for row in result.rows:
        by_n.setdefault(row.n, []).append(row)

    per_n = []
    flags: dict = {}
    checks = []
    for n, rows in sorted(by_n.items()):
        valid = [r for r in rows if not r.skipped]
        entry = {
            "n": n,
            "rows": len(rows),
            "valid": len(valid),
            "skipped": len(rows) - len(valid),
            "estimate": _stats(r.estimate for r in valid),
        }
        if valid:
            extra = _experiment_entry(cfg, model, params, n, valid)
            entry.update(extra)
            if "pass" in extra:
                checks.append(extra["pass"])
        per_n.append(entry)

    no_valid = all(e["valid"] == 0 for e in per_n)
    flags["no_valid_replicates"] = no_valid
    if no_valid:
        flags["status"] = "no valid replicates"

    fit = None
    if cfg.experiment == "bahadur_rate" and len(per_n) >= 4 and not no_valid:
        ns = [e["n"] for e in per_n]
        meds = [e.get("median_abs_remainder") or 0.0 for e in per_n]
        fit = rate_fit(ns, meds)
        flags["weak_rep_pass"] = fit.weak_pass
        flags["strong_rep_pass"] = fit.strong_pass
        checks.extend([fit.weak_pass, fit.strong_pass])
    if checks:
        flags["all_pass"] = all(checks)

    return {
        "config_echo": cfg.echo(),
        "per_n": per_n,
        "rate_fit": fit.as_dict() if fit else None,
        "flags": flags,
        "runtime_seconds": result.runtime_seconds if cfg.record_runtime else None,
    }


def ci_band_halfwidth(level: float) -> float:
    """Coverage tolerance: 0.02 at level 0.95, 0.04 at level 0.5.

    Proportional to the binomial standard deviation sqrt(level (1 - level)),
    floored at 0.02.
    """
    return max(0.02, 0.08 * math.sqrt(level * (1.0 - level)))


def _experiment_entry(cfg, model, params, n, valid) -> dict:
    exp = cfg.experiment
    if exp == "bahadur_rate":
        rem = np.array([r.remainder for r in valid])
        med_abs = float(np.median(np.abs(rem)))
        return {
            "remainder": _stats(rem.tolist()),
            "linear_term": _stats(r.linear_term for r in valid),
            "median_abs_remainder": med_abs,
            "sqrt_n_scaled": math.sqrt(n) * med_abs,
            "strong_scaled": n**0.75 * med_abs / math.log(n),
            "rate_envelope_D": bahadur.rate_envelope(params, n),
        }
    if exp == "bound_check":
        if cfg.estimator == "median":
            cb = bahadur.concentration_bound_median(model, params, n, cfg.l, cfg.epsilon)
        else:
            cb = bahadur.concentration_bound_mad(model, params, n, cfg.l, cfg.m, cfg.epsilon)
        freq = float(np.mean([r.aux[0] for r in valid]))
        allowed = cb.bound + 3.0 * math.sqrt(cb.bound / len(valid))
        return {"bound": cb.as_dict(), "exceedance": freq, "allowed": allowed, "pass": freq <= allowed}
    if exp in ("joint_normality", "conditional_normality"):
        draws = np.array([[r.aux[2], r.aux[3]] for r in valid])
        sigma = sigma_matrix(params)
        if exp == "conditional_normality":
            rep = joint_normality_check(draws, sigma.scaled(0.5), NormalityThresholds(diag_rel=0.15), n=n)
            return {"normality": rep.as_dict(), "label": "proof-internal claim", "target": "Sigma/2", "pass": rep.pass_diag}
        rep = joint_normality_check(draws, sigma, n=n)
        return {"normality": rep.as_dict(), "target": "Sigma", "pass": rep.passed}
    if exp == "pwm_variance":
        scaled = np.array([r.aux[0] for r in valid])
        asym = pwm_asym_variance(model, cfg.weight, params)
        var = float(scaled.var(ddof=1)) if scaled.size > 1 else float("nan")
        rel = abs(var - asym) / asym
        out = {"scaled_var": var, "asymptotic_var": asym, "rel_err": rel, "threshold": 0.10, "pass": rel <= 0.10}
        if cfg.k is None:
            rem = np.array([r.remainder for r in valid])
            out["sqrt_n_median_abs_remainder"] = math.sqrt(n) * float(np.median(np.abs(rem)))
            out["conditional_linear"] = _stats(r.aux[2] for r in valid)
        return out
    if exp == "ci_coverage":
        target = valid[0].target
        mean = model.mean
        cover = [r.aux[0] <= target <= r.aux[1] for r in valid]
        t_cover = [r.aux[2] <= mean <= r.aux[3] for r in valid] if math.isfinite(mean) else []
        cov = float(np.mean(cover))
        half = ci_band_halfwidth(cfg.ci_level)
        band = (cfg.ci_level - half, cfg.ci_level + half)
        return {
            "coverage": cov,
            "mean_length": float(np.mean([r.aux[1] - r.aux[0] for r in valid])),
            "t_coverage": float(np.mean(t_cover)) if t_cover else None,
            "t_mean_length": float(np.mean([r.aux[3] - r.aux[2] for r in valid])),
            "nominal": cfg.ci_level,
            "band": list(band),
            "pass": band[0] <= cov <= band[1],
        }
    raise MadstrapError(f"no summary for {exp}")
