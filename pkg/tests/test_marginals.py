"""Marginal family checks: probability functions, scores, moment maps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfmc.errors import DegenerateMomentsError, ParameterDomainError
from mfmc.models import (EULER_GAMMA, Bernoulli, Gaussian, Gumbel,
                         GumbelLocation, family_from_id, marginal_eval,
                         marginal_quantile, moment_map)
from mfmc.quadrature import central_box, expect_1d

FAMILIES = [Gaussian(0.7, 2.3), Gumbel(2.0, 4.0), GumbelLocation(1.5, 0.8),
            Bernoulli(0.3)]


class TestEvaluation:
    def test_gumbel_standard_point(self):
        """At the location, z = e^0 = 1, so the cdf is 1/e and the mu-score vanishes."""
        fam = Gumbel(0.0, 1.0)
        cdf, logpdf, score, hess = marginal_eval(fam, 0.0)
        np.testing.assert_allclose(cdf, math.exp(-1.0), rtol=1e-15)
        np.testing.assert_allclose(logpdf, -1.0, rtol=1e-15)
        np.testing.assert_allclose(score[0], 0.0, atol=1e-15)
        assert hess.shape == (2, 2)

    def test_gaussian_mode_log_density(self):
        val = Gaussian(0.0, 1.0).logpdf(0.0)
        np.testing.assert_allclose(val, -0.5 * math.log(2.0 * math.pi), rtol=1e-15)

    def test_bernoulli_mass_and_step_cdf(self):
        fam = Bernoulli(0.3)
        np.testing.assert_allclose(np.exp(fam.logpdf([0.0, 1.0])), [0.7, 0.3])
        np.testing.assert_allclose(fam.cdf([-0.5, 0.0, 0.5, 1.0, 2.0]),
                                   [0.0, 0.7, 0.7, 1.0, 1.0])

    def test_parameter_domain_errors(self):
        with pytest.raises(ParameterDomainError):
            Gumbel(0.0, -1.0)
        with pytest.raises(ParameterDomainError):
            Gaussian(0.0, 0.0)
        with pytest.raises(ParameterDomainError):
            Bernoulli(1.0)

    @pytest.mark.parametrize("fam", FAMILIES[:3], ids=lambda f: f.family_id)
    def test_score_matches_finite_differences(self, fam):
        rng = np.random.default_rng(3)
        x = fam.ppf(rng.uniform(0.05, 0.95, size=7))
        h = 1e-6
        theta = fam.theta
        for i in range(fam.d):
            up = theta.copy()
            dn = theta.copy()
            step = h * (1.0 + abs(theta[i]))
            up[i] += step
            dn[i] -= step
            fd = (fam.with_theta(up).logpdf(x) - fam.with_theta(dn).logpdf(x)) / (2 * step)
            np.testing.assert_allclose(fam.score(x)[:, i], fd, rtol=5e-6, atol=5e-8)

    @pytest.mark.parametrize("fam", FAMILIES[:3], ids=lambda f: f.family_id)
    def test_hessian_matches_finite_differences_of_score(self, fam):
        rng = np.random.default_rng(4)
        x = fam.ppf(rng.uniform(0.05, 0.95, size=5))
        theta = fam.theta
        for i in range(fam.d):
            step = 1e-6 * (1.0 + abs(theta[i]))
            up = theta.copy()
            dn = theta.copy()
            up[i] += step
            dn[i] -= step
            fd = (fam.with_theta(up).score(x) - fam.with_theta(dn).score(x)) / (2 * step)
            np.testing.assert_allclose(fam.hessian(x)[:, :, i], fd, rtol=1e-4, atol=1e-6)


class TestQuantiles:
    def test_gumbel_inverse_of_cdf_example(self):
        assert marginal_quantile(Gumbel(0.0, 1.0), math.exp(-1.0)) == pytest.approx(0.0, abs=1e-14)

    def test_gumbel_upper_quantile(self):
        # 2 + 4 * (-log(-log 0.99))
        pull = -math.log(-math.log(0.99))
        np.testing.assert_allclose(marginal_quantile(Gumbel(2.0, 4.0), 0.99),
                                   2.0 + 4.0 * pull, rtol=1e-14)
        np.testing.assert_allclose(2.0 + 4.0 * pull, 20.4005969, rtol=1e-8)

    def test_gaussian_median(self):
        assert marginal_quantile(Gaussian(0.0, 1.0), 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_domain_errors(self):
        for p in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ParameterDomainError):
                marginal_quantile(Gumbel(0.0, 1.0), p)

    @pytest.mark.parametrize("fam", FAMILIES[:3], ids=lambda f: f.family_id)
    @given(p=st.floats(1e-9, 1.0 - 1e-9))
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_cdf_of_quantile(self, fam, p):
        x = fam.ppf(p)
        assert abs(fam.cdf(x) - p) < 1e-10

    def test_cdf_monotone_with_limits(self):
        for fam in FAMILIES[:3]:
            lo, hi = fam.support_box()
            grid = np.linspace(lo, hi, 500)
            vals = fam.cdf(grid)
            assert np.all(np.diff(vals) >= -1e-15)
            assert vals[0] < 1e-9 and vals[-1] > 1.0 - 1e-9


class TestScoreAndInformationIdentities:
    @pytest.mark.parametrize("fam", FAMILIES[:3], ids=lambda f: f.family_id)
    def test_expected_score_is_zero_by_quadrature(self, fam):
        box = central_box(fam)
        mean_score = expect_1d(fam.score, lambda x: np.exp(fam.logpdf(x)), box)
        assert np.max(np.abs(mean_score)) < 1e-6

    def test_expected_score_is_zero_exactly_bernoulli(self):
        fam = Bernoulli(0.3)
        xs = np.array([0.0, 1.0])
        probs = np.exp(fam.logpdf(xs))
        total = probs @ fam.score(xs)
        np.testing.assert_allclose(total, 0.0, atol=1e-15)

    @pytest.mark.parametrize("fam", FAMILIES[:3], ids=lambda f: f.family_id)
    def test_information_identity_quadrature(self, fam):
        box = central_box(fam)

        def outer(x):
            s = fam.score(x)
            return s[:, :, None] * s[:, None, :]

        e_outer = expect_1d(outer, lambda x: np.exp(fam.logpdf(x)), box)
        e_hess = expect_1d(fam.hessian, lambda x: np.exp(fam.logpdf(x)), box)
        np.testing.assert_allclose(e_outer, -e_hess, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(e_outer, fam.fisher_information(), rtol=1e-6, atol=1e-9)

    @pytest.mark.parametrize("fam", FAMILIES[:3], ids=lambda f: f.family_id)
    def test_information_identity_monte_carlo(self, fam):
        """Same-sample identity holds to the larger of 1e-3 and 5 standard errors."""
        x = fam.sample(10**6, np.random.default_rng(11))
        s = fam.score(x)
        outer = s[:, :, None] * s[:, None, :]
        diff = outer + fam.hessian(x)
        mean_diff = np.mean(diff, axis=0)
        se = np.std(diff, axis=0, ddof=1) / math.sqrt(x.size)
        tol = np.maximum(1e-3 * np.max(np.abs(fam.fisher_information())), 5.0 * se)
        assert np.all(np.abs(mean_diff) <= tol)

    def test_bernoulli_information_exact(self):
        fam = Bernoulli(0.3)
        xs = np.array([0.0, 1.0])
        probs = np.exp(fam.logpdf(xs))
        s = fam.score(xs)
        e_outer = np.einsum("n,ni,nj->ij", probs, s, s)
        np.testing.assert_allclose(e_outer, fam.fisher_information(), rtol=1e-14)


class TestSamplers:
    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.family_id)
    def test_sampler_determinism(self, fam):
        a = fam.sample(1000, np.random.default_rng(5))
        b = fam.sample(1000, np.random.default_rng(5))
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("fam", FAMILIES[:3], ids=lambda f: f.family_id)
    def test_sampler_ks_below_critical(self, fam):
        from scipy import stats

        x = fam.sample(10**5, np.random.default_rng(6))
        stat = stats.kstest(x, fam.cdf).statistic
        assert stat < 1.6276 / math.sqrt(x.size)  # 1% critical value


class TestMomentMaps:
    def test_gaussian_jacobian_example(self):
        spec = moment_map("gaussian")
        np.testing.assert_allclose(spec.jacobian(np.array([2.0, 5.0])),
                                   [[1.0, 0.0], [-4.0, 1.0]], rtol=1e-15)

    def test_gumbel_roundtrip_at_true_parameters(self):
        spec = moment_map("gumbel")
        mu, sigma = 2.0, 4.0
        mean = mu + EULER_GAMMA * sigma
        second = sigma**2 * math.pi**2 / 6.0 + mean**2
        np.testing.assert_allclose(spec.g(np.array([mean, second])), [mu, sigma],
                                   rtol=1e-12)

    def test_bernoulli_identity(self):
        spec = moment_map("bernoulli")
        np.testing.assert_allclose(spec.g(np.array([0.3])), [0.3], rtol=1e-15)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.family_id)
    def test_g_of_expected_features_recovers_theta(self, fam):
        spec = fam.moment_spec()
        if fam.is_discrete:
            xs = np.array([0.0, 1.0])
            probs = np.exp(fam.logpdf(xs))
            mu_y = np.atleast_2d(spec.h(xs)).T @ probs
        else:
            mu_y = expect_1d(lambda x: np.atleast_2d(spec.h(x)),
                             lambda x: np.exp(fam.logpdf(x)), central_box(fam))
        np.testing.assert_allclose(spec.g(mu_y), fam.theta, rtol=1e-6, atol=1e-8)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.family_id)
    def test_jacobian_matches_finite_differences(self, fam):
        spec = fam.moment_spec()
        rng = np.random.default_rng(9)
        x = (np.array([0.0, 1.0, 1.0]) if fam.is_discrete
             else fam.ppf(rng.uniform(0.1, 0.9, size=25)))
        mu_y = np.mean(np.atleast_2d(spec.h(x)), axis=0)
        jac = spec.jacobian(mu_y)
        fd = np.empty_like(jac)
        for j in range(spec.d1):
            step = 1e-6 * (1.0 + abs(mu_y[j]))
            up = mu_y.copy()
            dn = mu_y.copy()
            up[j] += step
            dn[j] -= step
            fd[:, j] = (spec.g(up) - spec.g(dn)) / (2.0 * step)
        np.testing.assert_allclose(jac, fd, rtol=1e-6, atol=1e-9)

    def test_degenerate_moments_error(self):
        spec = moment_map("gumbel")
        with pytest.raises(DegenerateMomentsError):
            spec.g(np.array([2.0, 4.0]))  # second moment below squared mean


def test_family_registry():
    assert isinstance(family_from_id("gaussian", 0.0, 1.0), Gaussian)
    assert isinstance(family_from_id("gumbel-location", 0.0, 2.0), GumbelLocation)
    with pytest.raises(ParameterDomainError):
        family_from_id("cauchy", 0.0)
    with pytest.raises(ParameterDomainError):
        moment_map("gumbel-location")
