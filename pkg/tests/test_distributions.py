import math

import numpy as np
import pytest
from scipy import integrate, stats

from chartests import AlternativeFamily, NullFamily
from chartests._common import DomainError, TestKind
from chartests.distributions import Alternative

PA, LO, EX = TestKind.PARETO, TestKind.LOGISTIC, TestKind.EXPONENTIAL
ALTS = list(Alternative)


def test_null_examples():
    assert NullFamily(PA).cdf(2.0) == pytest.approx(0.5)
    assert NullFamily(LO).cdf(0.0) == pytest.approx(0.5)
    assert NullFamily(EX).quantile(1 - math.exp(-1)) == pytest.approx(1.0)


@pytest.mark.parametrize("kind", list(TestKind), ids=lambda k: k.short)
@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_quantile_inverts_cdf(kind, lam):
    fam = NullFamily(kind, lam)
    p = np.linspace(1e-6, 1 - 1e-6, 401)
    np.testing.assert_allclose(fam.cdf(fam.quantile(p)), p, atol=1e-12)


def test_outside_support_and_bad_levels():
    assert NullFamily(PA).pdf(0.5) == 0.0
    assert NullFamily(EX).cdf(-1.0) == 0.0
    with pytest.raises(DomainError):
        NullFamily(EX).quantile(1.0)
    with pytest.raises(DomainError):
        NullFamily(EX, -1.0)


def test_null_sampling_moments():
    rng = np.random.default_rng(1)
    assert np.mean(1 / NullFamily(PA).sample(10**5, rng).values) == pytest.approx(0.5, abs=0.005)
    assert np.mean(NullFamily(EX, 2.0).sample(10**5, rng).values) == pytest.approx(0.5, abs=0.01)
    a = NullFamily(LO).sample(50, np.random.default_rng(3)).values
    b = NullFamily(LO).sample(50, np.random.default_rng(3)).values
    assert np.array_equal(a, b)


def test_alternative_density_examples():
    assert AlternativeFamily("mixture").pdf(2.0, 0.0) == pytest.approx(0.25)
    assert AlternativeFamily("gld").pdf(0.0, 0.0) == pytest.approx(0.25)
    expected = (1 + 0.1 * (1 - math.exp(-1))) * math.exp(-1 - 0.1 * math.exp(-1))
    assert AlternativeFamily("makeham").pdf(1.0, 0.1) == pytest.approx(expected, rel=1e-12)


def _support_grid(fam, k=100):
    return fam.null.quantile(np.linspace(0.005, 0.995, k))


@pytest.mark.parametrize("alt", ALTS, ids=lambda a: a.value)
def test_theta_zero_is_null(alt):
    fam = AlternativeFamily(alt)
    x = _support_grid(fam)
    np.testing.assert_allclose(fam.pdf(x, 0.0), fam.null.pdf(x), atol=1e-12)


@pytest.mark.parametrize("alt", ALTS, ids=lambda a: a.value)
@pytest.mark.parametrize("theta", [0.0, 0.05, 0.25])
def test_density_normalised(alt, theta):
    fam = AlternativeFamily(alt)
    lo, hi = fam.null.support
    total, _ = integrate.quad(lambda x: fam.pdf(x, theta), lo, hi, epsabs=1e-12, limit=400)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("alt", ALTS, ids=lambda a: a.value)
def test_score_matches_finite_difference(alt):
    fam = AlternativeFamily(alt)
    x = _support_grid(fam)
    eps = 1e-5
    # one-sided second-order difference, the domain starts at theta = 0
    fd = (-3 * fam.pdf(x, 0.0) + 4 * fam.pdf(x, eps) - fam.pdf(x, 2 * eps)) / (2 * eps)
    h = fam.score(x)
    np.testing.assert_allclose(fd, h, rtol=1e-6, atol=1e-9)


@pytest.mark.parametrize("alt", ALTS, ids=lambda a: a.value)
def test_score_integrates_to_zero_and_cdf(alt):
    fam = AlternativeFamily(alt)
    lo, hi = fam.null.support
    total, _ = integrate.quad(fam.score, lo, hi, epsabs=1e-12, limit=400)
    assert total == pytest.approx(0.0, abs=1e-9)
    for x in _support_grid(fam, 7):
        part, _ = integrate.quad(fam.score, lo, x, epsabs=1e-13, limit=400)
        assert fam.score_cdf(x) == pytest.approx(part, abs=1e-9)


def test_score_examples():
    assert AlternativeFamily("mixture").score(1.0 + 1e-15) == pytest.approx(5.0)
    assert AlternativeFamily("makeham").score(0.0) == pytest.approx(0.0)


@pytest.mark.parametrize("alt", ALTS, ids=lambda a: a.value)
def test_alternative_quantile_inverts(alt):
    fam = AlternativeFamily(alt)
    theta = 0.5 * min(fam.theta_domain[1], 1.0)
    u = np.linspace(0.01, 0.99, 51)
    np.testing.assert_allclose(fam.cdf(fam.quantile(u, theta), theta), u, atol=1e-10)


def test_gld_and_makeham_quantiles():
    u = 0.3
    assert AlternativeFamily("gld").quantile(u, 0.4) == pytest.approx(-math.log(u ** (-1 / 1.4) - 1))
    x = AlternativeFamily("makeham").quantile(0.5, 0.5)
    mass, _ = integrate.quad(lambda v: AlternativeFamily("makeham").pdf(v, 0.5), 0, x, epsabs=1e-13)
    assert mass == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("alt", ALTS, ids=lambda a: a.value)
def test_sampler_matches_cdf(alt):
    fam = AlternativeFamily(alt)
    theta = 0.3 * min(fam.theta_domain[1], 1.0)
    x = fam.sample(theta, 10**5, np.random.default_rng(11)).values
    assert stats.kstest(x, lambda v: fam.cdf(v, theta)).pvalue > 0.001


def test_weibull_zero_is_exponential():
    x = AlternativeFamily("weibull").sample(0.0, 10**5, np.random.default_rng(5)).values
    assert stats.kstest(x, "expon").pvalue > 0.01


def test_domain_errors():
    with pytest.raises(DomainError):
        AlternativeFamily("ley-paindaveine").pdf(2.0, 0.5)
    with pytest.raises(DomainError):
        AlternativeFamily("gld").pdf(0.0, -0.1)
    with pytest.raises(DomainError):
        AlternativeFamily("nope")
    with pytest.raises(DomainError):
        AlternativeFamily("mixture", beta=1.0)
