import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from madstrap.distributions import (
    FAMILIES,
    draw_sample,
    make_model,
    quantile,
    robust_params,
)
from madstrap.errors import DomainError, ModelUnsupportedError

from .oracles import fixtures_mpmath as orc

SYMMETRIC = ("normal", "laplace", "cauchy", "uniform", "contaminated_normal")


def params_strategy(family):
    pos = st.floats(0.2, 5.0)
    loc = st.floats(-10.0, 10.0)
    if family == "normal":
        return st.fixed_dictionaries({"mu": loc, "sigma": pos})
    if family == "laplace":
        return st.fixed_dictionaries({"mu": loc, "b": pos})
    if family == "cauchy":
        return st.fixed_dictionaries({"x0": loc, "scale": pos})
    if family == "uniform":
        return st.tuples(loc, pos).map(lambda t: {"a": t[0], "b": t[0] + t[1]})
    if family == "exponential":
        return st.fixed_dictionaries({"lam": pos})
    return st.fixed_dictionaries({"eps_c": st.floats(0.0, 0.5), "sigma_c": st.floats(1.5, 10.0)})


models = st.sampled_from(FAMILIES).flatmap(lambda f: params_strategy(f).map(lambda p: make_model(f, **p)))


def test_quantile_examples():
    assert quantile(make_model("normal"), 0.5) == 0.0
    assert quantile(make_model("exponential"), 0.5) == pytest.approx(math.log(2), abs=1e-15)
    assert quantile(make_model("uniform"), 0.25) == 0.25


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_rejects_outside_open_unit_interval(p):
    with pytest.raises(DomainError):
        quantile(make_model("normal"), p)


def test_unknown_family():
    with pytest.raises(DomainError, match="unknown distribution family"):
        make_model("nosuch")


def test_bad_parameters():
    with pytest.raises(DomainError):
        make_model("normal", sigma=0.0)
    with pytest.raises(DomainError):
        make_model("uniform", a=1.0, b=1.0)
    with pytest.raises(DomainError):
        make_model("normal", lam=1.0)


@pytest.mark.parametrize("family", FAMILIES)
def test_cdf_quantile_roundtrip_and_monotone(family):
    m = make_model(family)
    p = np.linspace(0.001, 0.999, 499)
    x = m.quantile(p)
    np.testing.assert_allclose(m.cdf(x), p, atol=1e-10)
    assert np.all(np.diff(m.cdf(np.linspace(-20, 20, 2001))) >= 0)


@pytest.mark.parametrize("family", FAMILIES)
def test_pdf_is_cdf_derivative(family, rng):
    m = make_model(family)
    u = rng.uniform(0.02, 0.98, 100)
    x = m.quantile(u)
    h = 1e-5
    fd = (m.cdf(x + h) - m.cdf(x - h)) / (2 * h)
    np.testing.assert_allclose(m.pdf(x), fd, atol=1e-6)
    assert np.all(m.pdf(x) >= 0)


def test_robust_params_match_high_precision_oracle():
    for family, fn in [("normal", orc.normal_params), ("laplace", orc.laplace_params), ("exponential", orc.exponential_params)]:
        got = robust_params(make_model(family)).as_dict()
        p = fn()
        d = orc.derived(p)
        want = {"v": p["v"], "xi": p["xi"], "fv": p["fv"], "f_lo": p["f_lo"], "f_hi": p["f_hi"],
                "cdf_lo": p["F_lo"], "g_prime": d["g_prime"], "alpha": d["alpha"], "beta": d["beta"], "gamma": d["gamma"]}
        for k, v in want.items():
            assert got[k] == pytest.approx(float(v), abs=1e-12), (family, k)


def test_exponential_closed_forms():
    r = robust_params(make_model("exponential"))
    assert r.xi == pytest.approx(math.log((1 + math.sqrt(5)) / 2), abs=1e-14)
    assert r.f_lo == pytest.approx(0.809017, abs=1e-6)
    assert r.f_hi == pytest.approx(0.309017, abs=1e-6)
    assert r.beta == pytest.approx(0.5, abs=1e-14)
    assert r.alpha == pytest.approx(0.881966, abs=1e-6)
    assert r.gamma == pytest.approx(0.368034, abs=1e-6)


def test_normal_mad_is_upper_quartile():
    r = robust_params(make_model("normal"))
    assert r.xi == pytest.approx(stats.norm.ppf(0.75), abs=1e-14)


@given(models)
def test_robust_params_invariants(m):
    r = robust_params(m)
    assert abs(float(m.cdf(r.v)) - 0.5) <= 1e-10
    assert abs(float(m.cdf(r.v + r.xi) - m.cdf(r.v - r.xi)) - 0.5) <= 1e-10
    assert r.g_prime == r.f_lo + r.f_hi
    assert r.gamma == r.beta**2 + 4.0 * (1.0 - r.alpha) * r.beta * r.fv
    if m.family in SYMMETRIC:
        assert abs(r.beta) <= 1e-10 * max(1.0, r.fv)
        assert abs(r.alpha - 1.0) <= 1e-10


@given(st.floats(-50, 50), st.floats(0.01, 100))
def test_normal_affine_pushforward(mu, sigma):
    base = robust_params(make_model("normal"))
    r = robust_params(make_model("normal", mu=mu, sigma=sigma))
    assert r.v == pytest.approx(mu, abs=1e-9)
    assert r.xi == pytest.approx(sigma * base.xi, rel=1e-9)
    assert r.fv == pytest.approx(base.fv / sigma, rel=1e-9)


def test_zero_density_at_target_is_unsupported():
    # uniform(0,1) works: v = 1/2, xi = 1/4 with positive density
    r = robust_params(make_model("uniform"))
    assert r.xi == pytest.approx(0.25, abs=1e-14)
    from madstrap.distributions import DistributionModel

    # a two-point-like model with no mass near its median
    gap = DistributionModel(
        "uniform", (0.0, 1.0),
        lambda x: np.clip(np.where(x < 1, x, x - 1) / 2 + np.where(x >= 1, 0.5, 0), 0, 1) * (x < 2) + (x >= 2),
        lambda x: np.zeros_like(x),
        lambda p: np.where(p < 0.5, 2 * p, 1 + 2 * p - 1),
    )
    with pytest.raises(ModelUnsupportedError):
        robust_params(gap)


def test_draw_sample_deterministic_and_guarded():
    m = make_model("laplace")
    np.testing.assert_array_equal(draw_sample(m, 5, 7), draw_sample(m, 5, 7))
    assert draw_sample(m, 5, 7).tobytes() != draw_sample(m, 5, 8).tobytes()
    with pytest.raises(DomainError):
        draw_sample(m, 0, 1)


def test_draw_sample_uniform_ks():
    x = draw_sample(make_model("uniform"), 100_000, 1)
    assert stats.kstest(x, "uniform").statistic < 1.63 / math.sqrt(x.size)


def test_draw_sample_normal_mean():
    x = draw_sample(make_model("normal"), 100_000, 2)
    assert abs(x.mean()) < 4 / math.sqrt(x.size)


def test_contaminated_normal_quantile_inverts_cdf():
    m = make_model("contaminated_normal", eps_c=0.2, sigma_c=5.0)
    p = np.array([1e-6, 0.01, 0.3, 0.5, 0.77, 0.999999])
    np.testing.assert_allclose(m.cdf(m.quantile(p)), p, atol=1e-12)
