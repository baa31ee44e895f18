"""Command-line front end.

Single-shot subcommands print one JSON document on stdout. ``experiment``
writes the replicate CSV to ``--out`` and prints the summary JSON. Exit
codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .asymptotics import joint_normality_check, sigma_matrix
from .bahadur import KINDS, concentration_bound_mad, concentration_bound_median, decompose
from .bootstrap import BootstrapSample, ResamplePlan, resample
from .depth import WeightFunction, influence_kernel, kernel_moments, pwm_asym_variance, pwm_population, pwm_sample, modified_mad_pwm
from .distributions import FAMILIES, FAMILY_PARAMS, draw_sample, make_model, robust_params
from .errors import ConfigError, DomainError, MadstrapError
from .estimators import SortedSample, generalized_mad, generalized_median, modified_mad, sample_mad, sample_median
from .harness import (
    ExperimentConfig,
    _outer_and_indices,
    csv_text,
    resolve_workers,
    run_experiment,
    summary_json,
)
from .rng import hash64

SUBCOMMANDS = ("params", "sigma", "estimate", "bound", "bahadur", "jointnorm", "pwm", "experiment")

# flag name -> (family parameter, help)
PARAM_FLAGS = {
    "--mu": ("mu", "location (normal, laplace)"),
    "--sigma": ("sigma", "standard deviation (normal)"),
    "--b": ("b", "scale (laplace) or upper end (uniform)"),
    "--x0": ("x0", "location (cauchy)"),
    "--scale": ("scale", "scale (cauchy)"),
    "--a": ("a", "lower end (uniform)"),
    "--lam": ("lam", "rate (exponential)"),
    "--eps-c": ("eps_c", "contamination fraction (contaminated_normal)"),
    "--sigma-c": ("sigma_c", "contaminating standard deviation (contaminated_normal)"),
}


class UsageError(Exception):
    """Bad flag value; reported like an argparse error (exit 2)."""


def _real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"number out of range: {text!r}")
    return value


def _int(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _seed(text: str) -> int:
    value = _int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64): {text}")
    return value


def _positive_int(text: str) -> int:
    value = _int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text}")
    return value


def _data(text: str) -> list[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise argparse.ArgumentTypeError("empty data list")
    return [_real(p) for p in parts]


def _add_dist(p: argparse.ArgumentParser, required: bool = True):
    g = p.add_argument_group("distribution")
    g.add_argument("--dist", required=required, metavar="FAMILY", help="one of: " + ", ".join(FAMILIES))
    for flag, (dest, text) in PARAM_FLAGS.items():
        g.add_argument(flag, dest="p_" + dest, type=_real, metavar="X", help=text)


def _add_weight(p: argparse.ArgumentParser):
    g = p.add_argument_group("weight")
    g.add_argument("--weight", choices=("power", "zuo"), default="power", help="weight family (default power)")
    g.add_argument("--p", type=_real, default=2.0, help="exponent of the power weight (default 2)")
    g.add_argument("--wk", type=_real, default=3.0, help="k of the zuo weight (default 3)")
    g.add_argument("--wc", type=_real, default=1.0, help="c of the zuo weight (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="madstrap",
        description="Bootstrap median/MAD estimators, their linear expansions, bounds and depth weighted means.",
    )
    parser.add_argument("--version", action="version", version=f"madstrap {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)

    p = sub.add_parser("params", help="population median, MAD and density constants")
    _add_dist(p)

    p = sub.add_parser("sigma", help="limit covariance of sqrt(n)(Med* - v, MAD* - xi)")
    _add_dist(p)

    p = sub.add_parser("estimate", help="median, MAD and PWM of a sample, optionally of one resample")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", type=_data, help="comma or space separated values")
    src.add_argument("--dist", metavar="FAMILY", help="draw the sample from this family (needs --n and --seed)")
    for flag, (dest, text) in PARAM_FLAGS.items():
        p.add_argument(flag, dest="p_" + dest, type=_real, metavar="X", help=text)
    p.add_argument("--n", type=_positive_int, help="sample size when drawing from --dist")
    p.add_argument("--seed", type=_seed, help="seed of the drawn sample")
    p.add_argument("--l", type=_positive_int, default=1, help="index shift of the generalized median (default 1)")
    p.add_argument("--m", type=_positive_int, default=1, help="index shift of the generalized MAD (default 1)")
    p.add_argument("--k", type=_positive_int, help="index of the modified MAD")
    p.add_argument("--resample-seed", type=_seed, help="also report the statistics of one bootstrap resample")
    p.add_argument("--rep", type=_int, default=0, help="replicate index of that resample (default 0)")
    _add_weight(p)

    p = sub.add_parser("bound", help="exponential concentration bound for the median or the MAD")
    _add_dist(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--l", type=_positive_int, default=1)
    p.add_argument("--m", type=_positive_int, default=1)
    p.add_argument("--eps", type=_real, required=True)
    p.add_argument("--which", choices=("median", "mad"), default="median")

    p = sub.add_parser("bahadur", help="linear term and remainder for one bootstrap replicate")
    _add_dist(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, required=True, help="master seed")
    p.add_argument("--rep", type=_int, default=0, help="replicate index (default 0)")
    p.add_argument("--kind", choices=KINDS, default="mad")
    p.add_argument("--l", type=_positive_int, default=1)
    p.add_argument("--m", type=_positive_int, default=1)

    p = sub.add_parser("jointnorm", help="Monte Carlo check of sqrt(n)(Med*, MAD*) against Sigma")
    _add_dist(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--reps", type=_positive_int, default=2000)
    p.add_argument("--seed", type=_seed, required=True, help="master seed")
    p.add_argument("--workers", type=_positive_int, help="worker processes (default: MADSTRAP_WORKERS or 1)")
    p.add_argument("--out", help="write the replicate CSV here")

    p = sub.add_parser("pwm", help="population PWM, its influence kernel and limit variance")
    _add_dist(p)
    _add_weight(p)
    p.add_argument("--nodes", type=_positive_int, default=256, help="Gauss-Legendre nodes per panel (default 256)")

    p = sub.add_parser("experiment", help="run an experiment described by a TOML file")
    p.add_argument("--config", required=True, help="TOML configuration")
    p.add_argument("--out", help="CSV path (overrides [output] csv)")
    p.add_argument("--summary", help="summary JSON path (overrides [output] summary)")
    p.add_argument("--workers", type=_positive_int, help="worker processes (default: MADSTRAP_WORKERS or 1)")
    return parser


def _model(args):
    family = args.dist
    if family not in FAMILY_PARAMS:
        raise UsageError(f"unknown distribution family: {family!r} (expected one of {', '.join(FAMILIES)})")
    given = {}
    for flag, (dest, _) in PARAM_FLAGS.items():
        value = getattr(args, "p_" + dest, None)
        if value is not None:
            if dest not in dict(FAMILY_PARAMS[family]):
                raise UsageError(f"{flag} does not apply to {family}")
            given[dest] = value
    try:
        return make_model(family, **given)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def _weight(args) -> WeightFunction:
    try:
        if args.weight == "power":
            return WeightFunction.power(args.p)
        return WeightFunction.zuo(args.wk, args.wc)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def _model_echo(model) -> dict:
    return {"family": model.family, **model.param_dict}


def cmd_params(args) -> dict:
    model = _model(args)
    return {"distribution": _model_echo(model), **robust_params(model).as_dict()}


def cmd_sigma(args) -> dict:
    model = _model(args)
    s = sigma_matrix(robust_params(model))
    return {"distribution": _model_echo(model), "sigma": s.as_array().tolist(), "s11": s.s11, "s12": s.s12, "s22": s.s22}


def _stats_of(s: SortedSample, args, w: WeightFunction) -> dict:
    n = s.n
    out = {"n": n, "median": sample_median(s), "mad": sample_mad(s)}
    if n >= 2:
        if not (args.l <= n // 2 and args.m <= n // 2):
            raise UsageError(f"--l and --m must not exceed n//2 = {n // 2}")
        out["generalized_median"] = generalized_median(s, args.l)
        out["generalized_mad"] = generalized_mad(s, args.m, args.l)
    if args.k is not None:
        if not args.k <= n - 1:
            raise UsageError(f"--k must not exceed n-1 = {n - 1}")
        out["modified_mad"] = modified_mad(s, args.k)
        out["pwm_modified"] = _pwm_or_none(lambda: modified_mad_pwm(s, args.k, w))
    out["pwm"] = _pwm_or_none(lambda: pwm_sample(s, w))
    return out


def _pwm_or_none(fn):
    try:
        return fn().value
    except MadstrapError:
        return None


def cmd_estimate(args) -> dict:
    w = _weight(args)
    if args.data is not None:
        values = np.array(args.data)
        source = {"data": "argument"}
    else:
        model = _model(args)
        if args.n is None or args.seed is None:
            raise UsageError("--dist needs --n and --seed")
        values = draw_sample(model, args.n, args.seed)
        source = {"distribution": _model_echo(model), "seed": args.seed}
    s = SortedSample.of(values)
    out = {"source": source, "weight": w.as_dict(), "sample": _stats_of(s, args, w)}
    if args.resample_seed is not None:
        plan = ResamplePlan(args.resample_seed, args.rep)
        bs: BootstrapSample = resample(s, plan)
        out["resample"] = {"seed_used": plan.seed, **_stats_of(bs.resampled, args, w)}
    return out


def cmd_bound(args) -> dict:
    model = _model(args)
    params = robust_params(model)
    try:
        if args.which == "median":
            cb = concentration_bound_median(model, params, args.n, args.l, args.eps)
        else:
            cb = concentration_bound_mad(model, params, args.n, args.l, args.m, args.eps)
    except (DomainError, IndexError) as exc:
        raise UsageError(str(exc)) from exc
    return {"distribution": _model_echo(model), "which": args.which, "l": args.l,
            "m": args.m if args.which == "mad" else None, **cb.as_dict()}


def cmd_bahadur(args) -> dict:
    model = _model(args)
    params = robust_params(model)
    if args.n < 2 or args.l > args.n // 2 or args.m > args.n // 2:
        raise UsageError("need n >= 2 and l, m <= n//2")
    seed = hash64(args.seed, args.n, args.rep)
    x, idx = _outer_and_indices(model, args.n, [seed])
    parent = SortedSample.of(x[0])
    order = np.argsort(x[0], kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(args.n)
    bs = BootstrapSample(parent, rank[idx[0, 0]], SortedSample.of(x[0][idx[0, 0]]))
    d = decompose(bs, params, args.kind, args.m, args.l)
    return {
        "distribution": _model_echo(model),
        "n": args.n,
        "replicate_index": args.rep,
        "seed_used": seed,
        "kind": d.kind,
        "estimate": d.estimate,
        "target": d.target,
        "linear_term": d.linear_term,
        "remainder": d.remainder,
    }


def cmd_jointnorm(args) -> dict:
    model = _model(args)
    params = robust_params(model)
    try:
        cfg = ExperimentConfig(
            experiment="joint_normality",
            family=model.family,
            dist_params=tuple(sorted(model.param_dict.items())),
            n_grid=(args.n,),
            reps=args.reps,
            master_seed=args.seed,
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    result = run_experiment(cfg, workers=args.workers, write=False)
    if args.out:
        _write(args.out, csv_text(result))
    draws = np.array([[r.aux[2], r.aux[3]] for r in result.rows])
    report = joint_normality_check(draws, sigma_matrix(params), n=args.n)
    return {"distribution": _model_echo(model), "n": args.n, "reps": args.reps, "seed": args.seed, **report.as_dict()}


def cmd_pwm(args) -> dict:
    model = _model(args)
    params = robust_params(model)
    w = _weight(args)
    pop = pwm_population(model, w, params, args.nodes)
    kern = influence_kernel(model, w, params, args.nodes)
    m1, m2 = kernel_moments(model, w, params, args.nodes)
    return {
        "distribution": _model_echo(model),
        "weight": w.as_dict(),
        "pwm": pop.value,
        "asymptotic_variance": pwm_asym_variance(model, w, params, args.nodes),
        "kernel_mean": m1,
        "kernel_second_moment": m2,
        "kernel_at_median": float(kern(params.v)),
    }


def cmd_experiment(args) -> str:
    cfg = ExperimentConfig.from_toml(args.config)
    csv_path = args.out or cfg.csv_path
    summary_path = args.summary or cfg.summary_path
    result = run_experiment(cfg, workers=args.workers, write=False)
    if csv_path:
        _write(csv_path, csv_text(result))
    text = summary_json(result.summary)
    if summary_path:
        _write(summary_path, text)
    return text


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


COMMANDS = {
    "params": cmd_params,
    "sigma": cmd_sigma,
    "estimate": cmd_estimate,
    "bound": cmd_bound,
    "bahadur": cmd_bahadur,
    "jointnorm": cmd_jointnorm,
    "pwm": cmd_pwm,
    "experiment": cmd_experiment,
}


def _json(obj) -> str:
    from .harness import _clean

    return json.dumps(_clean(obj), indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if hasattr(args, "workers"):
            resolve_workers(args.workers)
        out = COMMANDS[args.command](args)
    except (UsageError, ConfigError, DomainError) as exc:
        print(f"madstrap {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        where = f" {exc.filename}" if getattr(exc, "filename", None) else ""
        print(f"madstrap {args.command}: I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    except (MadstrapError, ArithmeticError) as exc:
        print(f"madstrap {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out if isinstance(out, str) else _json(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
