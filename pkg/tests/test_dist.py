import numpy as np
import pytest
from scipy import integrate, special, stats

from lobres.dist import (
    FAMILIES,
    GgdNatural,
    ParamSet,
    cdf,
    from_natural,
    get_family,
    lognormal_limit,
    log_pdf,
    mean_variance,
    natural_log_pdf,
    quantile,
    score,
    to_natural,
)
from lobres.errors import DistributionError

CASES = [
    ParamSet("lognormal", 1.2, 0.7),
    ParamSet("gamma", 3.0, 0.6),
    ParamSet("weibull", 2.5, 1.7),
    ParamSet("gengamma", 2.0, 0.4, 1.3),
    ParamSet("gengamma", 2.0, 0.4, -0.7),
]


def _ids(p):
    return f"{p.family}-{p.nu}"


def _pdf(params):
    return lambda t: float(np.exp(log_pdf(params, t))) if t > 0 else 0.0


# ============================================
# Closed forms and nesting
# ============================================

def test_exponential_and_weibull_densities():
    assert np.exp(log_pdf(ParamSet("gamma", 1.0, 1.0), 1.0)) == pytest.approx(np.exp(-1.0), rel=1e-12)
    weibull = ParamSet("weibull", special.gamma(1.5), 2.0)
    assert np.exp(log_pdf(weibull, 1.0)) == pytest.approx(2 * np.exp(-1.0), rel=1e-12)


def test_gengamma_with_unit_power_is_gamma():
    tau = np.linspace(0.1, 30, 50)
    reference = stats.gamma(3, scale=2).logpdf(tau)
    sigma = 1 / np.sqrt(3)
    np.testing.assert_allclose(natural_log_pdf(GgdNatural(1.0, 2.0, 3.0), tau), reference, atol=1e-10)
    np.testing.assert_allclose(log_pdf(ParamSet("gengamma", 6.0, sigma, 1.0), tau), reference, atol=1e-10)
    np.testing.assert_allclose(log_pdf(ParamSet("gamma", 6.0, sigma), tau), reference, atol=1e-10)


def test_gengamma_with_unit_theta_is_weibull():
    tau = np.linspace(0.05, 12, 40)
    gg = ParamSet("gengamma", 3.0, 0.5, 2.0)
    wb = ParamSet("weibull", 3.0 * special.gamma(1.5), 2.0)
    np.testing.assert_allclose(log_pdf(gg, tau), log_pdf(wb, tau), atol=1e-10)
    np.testing.assert_allclose(log_pdf(wb, tau), stats.weibull_min(2.0, scale=3.0).logpdf(tau), atol=1e-10)


def test_gengamma_approaches_lognormal_as_theta_grows():
    mu, sigma = 5.0, 0.6
    tau = np.exp(np.log(mu) + sigma * np.linspace(-2, 2, 41))
    target = log_pdf(ParamSet("lognormal", np.log(mu), sigma), tau)
    errors = []
    for theta in (1e2, 1e4, 1e6):
        nu = 1 / (sigma * np.sqrt(theta))
        errors.append(np.max(np.abs(log_pdf(ParamSet("gengamma", mu, sigma, nu), tau) - target)))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-2


def test_lognormal_limit_matches_log_moments():
    m, s = 0.8, 0.5
    close = from_natural(lognormal_limit(m, s, 100.0))
    family = get_family("gengamma")
    assert family.mean_log(close.mu, close.sigma, close.nu) == pytest.approx(m, abs=1e-10)
    tau = np.exp(m + s * np.linspace(-1.5, 1.5, 31))
    target = log_pdf(ParamSet("lognormal", m, s), tau)
    far = lognormal_limit(m, s, 10.0)
    err_far = np.max(np.abs(natural_log_pdf(far, tau) - target))
    err_close = np.max(np.abs(natural_log_pdf(lognormal_limit(m, s, 100.0), tau) - target))
    assert err_close < err_far
    assert err_close < 0.1


# ============================================
# Moments
# ============================================

def test_closed_form_moments():
    sigma = 1 / np.sqrt(3)
    for params in (ParamSet("gamma", 6.0, sigma), ParamSet("gengamma", 6.0, sigma, 1.0)):
        mean, var = mean_variance(params)
        assert mean == pytest.approx(6.0, rel=1e-12)
        assert var == pytest.approx(12.0, rel=1e-10)
    mean, var = mean_variance(ParamSet("weibull", 5.0, 1.0))
    assert (float(mean), float(var)) == pytest.approx((5.0, 25.0), rel=1e-12)


@pytest.mark.parametrize("params", CASES, ids=_ids)
def test_moments_match_quadrature(params):
    pdf = _pdf(params)
    m1 = integrate.quad(lambda t: t * pdf(t), 0, np.inf, limit=200)[0]
    m2 = integrate.quad(lambda t: t * t * pdf(t), 0, np.inf, limit=200)[0]
    mean, var = mean_variance(params)
    assert float(mean) == pytest.approx(m1, rel=1e-6)
    assert float(var) == pytest.approx(m2 - m1**2, rel=1e-5)


@pytest.mark.parametrize("params", CASES, ids=_ids)
def test_density_integrates_to_one(params):
    total = integrate.quad(_pdf(params), 0, np.inf, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-7)


def test_undefined_moment_rejected():
    with pytest.raises(DistributionError):
        mean_variance(ParamSet("gengamma", 1.0, 1.0, -2.0))


# ============================================
# Quantiles and CDF
# ============================================

def test_closed_form_quantiles():
    assert quantile(ParamSet("gamma", 1.0, 1.0), 0.5) == pytest.approx(np.log(2), rel=1e-12)
    weibull = ParamSet("weibull", special.gamma(1.5), 2.0)
    assert quantile(weibull, 1 - np.exp(-1)) == pytest.approx(1.0, rel=1e-12)
    assert quantile(ParamSet("lognormal", 0.3, 0.9), 0.5) == pytest.approx(np.exp(0.3), rel=1e-12)


@pytest.mark.parametrize("params", CASES, ids=_ids)
def test_quantile_inverts_cdf(params):
    u = np.array([0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99])
    np.testing.assert_allclose(cdf(params, quantile(params, u)), u, rtol=1e-9)
    tau = quantile(params, u)
    assert np.all(np.diff(tau) > 0)


@pytest.mark.parametrize("params", CASES, ids=_ids)
def test_cdf_matches_density(params):
    tau = float(quantile(params, 0.7))
    area = integrate.quad(_pdf(params), 0, tau, limit=200)[0]
    assert float(cdf(params, tau)) == pytest.approx(area, rel=1e-7)


def test_quantile_level_must_be_inside_unit_interval():
    params = ParamSet("lognormal", 0.0, 1.0)
    for u in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DistributionError):
            quantile(params, u)


# ============================================
# Score
# ============================================

@pytest.mark.parametrize("params", CASES, ids=_ids)
def test_score_matches_finite_differences(params):
    tau = np.array([0.3, 1.0, 2.2, 5.0, 11.0])
    names = ["mu", "sigma", "nu"][: params.dist.n_params()]
    analytic = score(params, tau)
    for name, grad in zip(names, analytic):
        value = float(getattr(params, name))
        h = 1e-6 * max(1.0, abs(value))
        up = ParamSet(**{**params.__dict__, name: value + h})
        down = ParamSet(**{**params.__dict__, name: value - h})
        numeric = (log_pdf(up, tau) - log_pdf(down, tau)) / (2 * h)
        np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-6)


def test_score_has_zero_mean():
    params = ParamSet("gengamma", 2.0, 0.4, 1.3)
    pdf = _pdf(params)
    for k in range(3):
        def weighted(t, k=k):
            return float(score(params, t)[k]) * pdf(t) if t > 0 else 0.0

        expected = integrate.quad(weighted, 0, np.inf, limit=200)[0]
        assert expected == pytest.approx(0.0, abs=1e-6)


# ============================================
# Validation and parameter forms
# ============================================

def test_invalid_parameters():
    with pytest.raises(DistributionError):
        ParamSet("gengamma", 1.0, 1.0, 0.0)
    with pytest.raises(DistributionError):
        ParamSet("gengamma", 1.0, 1.0)
    with pytest.raises(DistributionError):
        ParamSet("gamma", -1.0, 1.0)
    with pytest.raises(DistributionError):
        ParamSet("weibull", 1.0, 0.0)
    with pytest.raises(DistributionError):
        log_pdf(ParamSet("gamma", 1.0, 1.0), 0.0)
    with pytest.raises(DistributionError):
        get_family("pareto")


def test_natural_form_conversion():
    nat = to_natural(ParamSet("gengamma", 6.0, 1 / np.sqrt(3), 1.0))
    assert (nat.b, nat.a, nat.k) == pytest.approx((1.0, 2.0, 3.0), rel=1e-12)
    back = from_natural(nat)
    assert (back.mu, back.sigma, back.nu) == pytest.approx((6.0, 1 / np.sqrt(3), 1.0), rel=1e-12)
    tau = np.linspace(0.5, 9, 20)
    params = ParamSet("gengamma", 2.0, 0.4, 1.3)
    np.testing.assert_allclose(natural_log_pdf(to_natural(params), tau), log_pdf(params, tau), atol=1e-10)
    with pytest.raises(DistributionError):
        to_natural(ParamSet("gengamma", 2.0, 0.4, -0.7))
    with pytest.raises(DistributionError):
        to_natural(ParamSet("lognormal", 0.0, 1.0))


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_samples_follow_the_family(name, rng):
    params = {
        "lognormal": ParamSet("lognormal", 1.0, 0.5),
        "gamma": ParamSet("gamma", 3.0, 0.6),
        "weibull": ParamSet("weibull", 3.0, 1.5),
        "gengamma": ParamSet("gengamma", 3.0, 0.5, 0.8),
    }[name]
    draws = params.dist.sample(rng, params.mu, params.sigma, params.nu, size=4000)
    result = stats.kstest(draws, lambda t: cdf(params, t))
    assert result.pvalue > 1e-3
