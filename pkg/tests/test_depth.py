import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import integrate

from madstrap.bootstrap import ResamplePlan
from madstrap.depth import (
    DepthParams,
    WeightFunction,
    batch_pwm,
    influence_f,
    influence_K,
    influence_kernel,
    kernel_moments,
    modified_mad_pwm,
    projection_depth,
    pwm_asym_variance,
    pwm_bootstrap,
    pwm_population,
    pwm_sample,
)
from madstrap.distributions import make_model, robust_params
from madstrap.errors import DegenerateError, DomainError, IntegrabilityError
from madstrap.estimators import SortedSample, sample_mad, sample_median

from .oracles import fixtures_mpmath as orc

# independent x-space mpmath quadrature (tests/oracles/fixtures_mpmath.py)
PWM_EXPON_POWER2 = 0.672484235370863
ASYM_VAR_NORMAL_POWER2 = 3.05567389941387
ASYM_VAR_EXPON_POWER2 = 1.94439470063736

WEIGHTS = [WeightFunction.power(1), WeightFunction.power(2), WeightFunction.power(3.5), WeightFunction.zuo(3, 1), WeightFunction.zuo(2, 0.6)]


def setup(family, **kw):
    m = make_model(family, **kw)
    return m, robust_params(m)


def test_projection_depth_examples():
    dp = DepthParams(2.0, 0.5)
    assert projection_depth(2.0, dp) == 1
    assert projection_depth(2.5, dp) == 0.5 and projection_depth(1.5, dp) == 0.5
    assert projection_depth(3.5, dp) == 0.25
    for bad in (0.0, -1.0):
        with pytest.raises(DegenerateError):
            DepthParams(0.0, bad)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(0.01, 100), st.floats(-100, 100).filter(lambda a: abs(a) > 1e-3), st.floats(-1e3, 1e3))
def test_projection_depth_affine_invariance(x, c, s, a, b):
    lhs = projection_depth(a * x + b, DepthParams(a * c + b, abs(a) * s))
    rhs = projection_depth(x, DepthParams(c, s))
    assert lhs == pytest.approx(rhs, abs=1e-12)


@pytest.mark.parametrize("w", WEIGHTS, ids=lambda w: str(w.as_dict()))
def test_weight_functions(w):
    r = np.linspace(0.0, 1.0, 401)
    assert w(0.0) == 0.0
    assert np.all(w(r) >= 0)
    # small step: w'' jumps at r = c for the zuo weight
    h = 1e-8
    inner = r[1:-1]
    fd = (w(inner + h) - w(inner - h)) / (2 * h)
    np.testing.assert_allclose(w.derivative(inner), fd, atol=1e-6)


def test_weight_validation():
    for bad in (lambda: WeightFunction.power(0.5), lambda: WeightFunction.zuo(0, 1), lambda: WeightFunction.zuo(1, 1.5),
                lambda: WeightFunction("gauss")):
        with pytest.raises(DomainError):
            bad()


@pytest.mark.parametrize("family,kw,w", [
    ("normal", {"mu": 1.5, "sigma": 2.0}, WeightFunction.power(2)),
    ("laplace", {}, WeightFunction.zuo(3, 1)),
    ("uniform", {"a": -1.0, "b": 3.0}, WeightFunction.power(1)),
    ("contaminated_normal", {}, WeightFunction.power(2)),
    ("cauchy", {"x0": -2.0}, WeightFunction.power(3)),
])
def test_symmetric_population_pwm_is_the_median(family, kw, w):
    m, p = setup(family, **kw)
    r = pwm_population(m, w, p)
    assert r.value == pytest.approx(p.v, abs=1e-9 * max(1.0, abs(p.v)))
    assert r.denominator > 0
    assert r.value == pytest.approx(r.numerator / r.denominator, rel=1e-15)


def test_exponential_pwm_matches_oracle(expon_std):
    m, p = expon_std
    assert pwm_population(m, WeightFunction.power(2), p).value == pytest.approx(PWM_EXPON_POWER2, abs=1e-9)


def test_cauchy_needs_fast_decaying_weight():
    m, p = setup("cauchy")
    for w in (WeightFunction.power(2), WeightFunction.zuo(3, 1)):
        with pytest.raises(IntegrabilityError):
            pwm_population(m, w, p)
        with pytest.raises(IntegrabilityError):
            pwm_asym_variance(m, w, p)


def test_pwm_sample_examples():
    with pytest.raises(DegenerateError):
        pwm_sample(SortedSample.of([3.0]))
    assert pwm_sample(SortedSample.of([-2.0, -2.0, 2.0, 2.0])).value == 0
    # Med 3, MAD 1, depths 1/3, 1/2, 1, 1/2, 1/3
    assert pwm_sample(SortedSample.of([1, 2, 3, 4, 5]), WeightFunction.power(1)).value == pytest.approx(3.0, abs=1e-15)
    r = pwm_sample(SortedSample.of([0, 1, 1, 4, 10]), WeightFunction.power(1))
    # Med 1, deviations [1,0,0,3,9], MAD 1, depths 1/2, 1, 1, 1/4, 1/10
    wts = np.array([0.5, 1, 1, 0.25, 0.1])
    assert r.value == pytest.approx(np.dot(wts, [0, 1, 1, 4, 10]) / wts.sum(), abs=1e-15)
    assert r.denominator == pytest.approx(wts.sum(), abs=1e-15)


def test_pwm_bootstrap_degenerate_and_deterministic():
    for r in range(5):
        with pytest.raises(DegenerateError):
            pwm_bootstrap(SortedSample.of([5, 5, 5, 5]), ResamplePlan(1, r))
    s = SortedSample.of(np.linspace(-1, 2, 15) ** 3)
    assert pwm_bootstrap(s, ResamplePlan(4, 2)).value == pwm_bootstrap(s, ResamplePlan(4, 2)).value


finite = st.floats(-1e4, 1e4, allow_nan=False)


@given(st.lists(finite, min_size=3, max_size=40), st.floats(0.01, 100), st.floats(-1e3, 1e3), st.booleans())
def test_pwm_affine_equivariance(x, a, b, flip):
    x = np.array(x)
    assume(sample_mad(SortedSample.of(x)) > 1e-6 * max(1.0, np.abs(x).max()))
    a = -a if flip else a
    w = WeightFunction.power(2)
    lhs = pwm_sample(SortedSample.of(a * x + b), w).value
    rhs = a * pwm_sample(SortedSample.of(x), w).value + b
    assert lhs == pytest.approx(rhs, abs=1e-10 * (abs(a) * max(1.0, np.abs(x).max()) + abs(b)))


@given(st.lists(finite, min_size=3, max_size=40))
def test_weights_never_favour_outlying_points(x):
    s = SortedSample.of(x)
    med, mad = sample_median(s), sample_mad(s)
    assume(mad > 0)
    w = WeightFunction.zuo(3, 0.8)
    d = np.abs(s.sorted - med)
    wt = w(projection_depth(s.sorted, DepthParams(med, mad)))
    order = np.argsort(d, kind="stable")
    assert np.all(np.diff(wt[order]) <= 0)


def test_modified_mad_pwm():
    s = SortedSample.of([0.3, 1.7, 2.0, 2.2, 9.0, -4.0])
    assert modified_mad_pwm(s, 1).value == pwm_sample(s).value
    assert modified_mad_pwm(SortedSample.of([-2, -1, 1, 2]), 2).value == 0
    # Med 3, MAD_{5,3} = 2, depths 1/2, 2/3, 1, 2/3, 1/2
    wts = np.array([0.5, 2 / 3, 1, 2 / 3, 0.5])
    want = np.dot(wts, [1, 2, 3, 4, 5]) / wts.sum()
    assert modified_mad_pwm(SortedSample.of([1, 2, 3, 4, 5]), 3, WeightFunction.power(1)).value == pytest.approx(want, abs=1e-15)
    with pytest.raises(DegenerateError):
        modified_mad_pwm(SortedSample.of([0, 0, 0, 0, 1]), 2)


def test_batch_pwm_matches_single(rng):
    rows = np.sort(rng.standard_t(3, size=(40, 25)), axis=1)
    rows[0] = 1.0
    vals, ok = batch_pwm(rows, WeightFunction.power(2))
    assert not ok[0] and math.isnan(vals[0])
    for i in range(1, 40):
        assert vals[i] == pytest.approx(pwm_sample(SortedSample.of(rows[i])).value, abs=1e-13)
    vals, ok = batch_pwm(rows[1:], WeightFunction.power(2), k=4)
    for i in range(39):
        assert vals[i] == pytest.approx(modified_mad_pwm(SortedSample.of(rows[i + 1]), 4).value, abs=1e-13)


def test_influence_f_examples(normal_std):
    _, p = normal_std
    ys = np.linspace(-3, 3, 13)
    np.testing.assert_array_equal(influence_f(p.v, ys, p), 0.0)
    assert influence_f(p.v + p.xi, p.v - p.xi - 0.5, p) == pytest.approx(-0.172944758256, abs=1e-11)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_influence_f_reflection_symmetry(x, y):
    _, p = setup("laplace", mu=0.7)
    v, xi = p.v, p.xi
    assume(min(abs(y - v), abs(y - v - xi), abs(y - v + xi)) > 1e-9)
    assert influence_f(2 * v - x, 2 * v - y, p) == pytest.approx(influence_f(x, y, p), abs=1e-14)


@pytest.mark.parametrize("family", ["normal", "laplace", "contaminated_normal"])
def test_kernel_odd_about_median(family):
    m, p = setup(family)
    w = WeightFunction.power(2)
    assert abs(influence_K(p.v, m, w, p)) <= 1e-8
    m1, m2 = kernel_moments(m, w, p)
    assert abs(m1) <= 1e-6
    assert pwm_asym_variance(m, w, p) == pytest.approx(2 * m2, rel=1e-10)


def test_influence_K_checks_pwm0(normal_std):
    m, p = normal_std
    w = WeightFunction.power(2)
    assert influence_K(0.3, m, w, p, pwm0=0.0) == influence_K(0.3, m, w, p)
    with pytest.raises(DomainError):
        influence_K(0.3, m, w, p, pwm0=0.5)


def quad_inner(x, model, w, p, pwm0, eps):
    """int (y - pwm0) w'(PD(y)) f(y, x) dF(y) with scipy's adaptive quadrature."""
    dp = DepthParams(p.v, p.xi)

    def g(y):
        return (y - pwm0) * w.derivative(projection_depth(y, dp)) * influence_f(y, x, p) * model.pdf(y)

    lo, hi = model.quantile(1e-15), model.quantile(1 - 1e-15)
    knots = [lo, p.v - p.xi, p.v, p.v + p.xi, hi]
    return sum(integrate.quad(g, a, b, epsabs=eps, epsrel=eps, limit=200)[0] for a, b in zip(knots[:-1], knots[1:]))


@pytest.mark.parametrize("family", ["normal", "exponential"])
def test_kernel_inner_integral_independent_quadrature(family):
    m, p = setup(family)
    w = WeightFunction.power(2)
    kern = influence_kernel(m, w, p)
    for x in (p.v - 1.3 * p.xi, p.v - 0.4 * p.xi, p.v + 0.2 * p.xi, p.v + 2.5 * p.xi):
        coarse = quad_inner(x, m, w, p, kern.pwm0, 1e-9)
        fine = quad_inner(x, m, w, p, kern.pwm0, 1e-12)
        assert coarse == pytest.approx(fine, abs=1e-8)
        assert kern.inner(x) == pytest.approx(fine, abs=1e-8)
        direct = kern(x) - (x - kern.pwm0) * w(projection_depth(x, DepthParams(p.v, p.xi))) / kern.denominator
        assert direct == pytest.approx(fine / kern.denominator, abs=1e-8)


def test_asymptotic_variance_matches_oracle(normal_std, expon_std):
    w = WeightFunction.power(2)
    assert pwm_asym_variance(*normal_std[:1], w, normal_std[1]) == pytest.approx(ASYM_VAR_NORMAL_POWER2, abs=1e-8)
    assert pwm_asym_variance(expon_std[0], w, expon_std[1]) == pytest.approx(ASYM_VAR_EXPON_POWER2, abs=1e-8)


@pytest.mark.parametrize("family", ["normal", "exponential", "laplace", "cauchy"])
def test_quadrature_doubling(family):
    m, p = setup(family)
    w = WeightFunction.power(3)
    a = pwm_population(m, w, p, nodes=256).value
    b = pwm_population(m, w, p, nodes=512).value
    assert abs(a - b) < 1e-8
    va = pwm_asym_variance(m, w, p, nodes=256)
    vb = pwm_asym_variance(m, w, p, nodes=512)
    assert va >= 0 and abs(va - vb) < 1e-8


@pytest.mark.parametrize("w", [WeightFunction.power(1), WeightFunction.power(2)], ids=["p1", "p2"])
def test_kernel_derivative_in_tail(w, expon_std):
    m, p = expon_std
    kern = influence_kernel(m, w, p)
    dp = DepthParams(p.v, p.xi)
    for x in (p.v + 4 * p.xi, p.v + 9 * p.xi):
        h = 1e-5
        fd = (kern(x + h) - kern(x - h)) / (2 * h)
        pd = projection_depth(x, dp)
        dpd = -pd**2 / p.xi
        exact = (w(pd) + (x - kern.pwm0) * w.derivative(pd) * dpd) / kern.denominator
        assert fd == pytest.approx(exact, rel=1e-4)
