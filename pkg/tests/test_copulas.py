"""Copula checks: Pickands function, boundary identities, sampling laws."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mfmc.errors import ParameterDomainError
from mfmc.models import (GaussianCopula, GumbelHougaardCopula,
                         IndependenceCopula, bvn_cdf, copula_eval,
                         copula_from_id, pickands_logistic,
                         sample_positive_stable)

COPULAS = [GaussianCopula(0.6), GaussianCopula(-0.4), GumbelHougaardCopula(0.3),
           GumbelHougaardCopula(0.8), IndependenceCopula()]


class TestPickands:
    def test_endpoints_are_one(self):
        for r in (0.1, 0.4, 0.7, 1.0):
            np.testing.assert_allclose(pickands_logistic([0.0, 1.0], r), [1.0, 1.0],
                                       rtol=1e-15)

    def test_independence_case(self):
        assert pickands_logistic(0.5, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_symmetric_point(self):
        # (2 * 0.5**(1/r))**r at r = 1/2
        assert pickands_logistic(0.5, 0.5) == pytest.approx(2.0**-0.5, rel=1e-14)

    def test_bounds_on_grid(self):
        t = np.linspace(0.0, 1.0, 1001)
        for r in np.round(np.arange(0.1, 1.01, 0.1), 10):
            a = pickands_logistic(t, r)
            assert np.all(a <= 1.0 + 1e-12)
            assert np.all(a >= np.maximum(t, 1.0 - t) - 1e-12)

    def test_convexity_on_grid(self):
        t = np.linspace(0.0, 1.0, 1001)
        for r in (0.15, 0.5, 0.9):
            a = pickands_logistic(t, r)
            assert np.all(np.diff(a, 2) >= -1e-10)

    def test_domain_errors(self):
        for r in (0.0, -0.5, 1.5):
            with pytest.raises(ParameterDomainError):
                pickands_logistic(0.5, r)
        with pytest.raises(ParameterDomainError):
            pickands_logistic(1.5, 0.5)


class TestBvnCdf:
    def test_arcsine_identity_at_origin(self):
        for rho in (-0.95, -0.5, 0.0, 0.3, 0.8, 0.99):
            exact = 0.25 + math.asin(rho) / (2.0 * math.pi)
            assert bvn_cdf(0.0, 0.0, rho) == pytest.approx(exact, abs=1e-12)

    def test_reduces_to_margin(self):
        from scipy.special import ndtr

        for rho in (-0.7, 0.2, 0.9):
            assert bvn_cdf(9.0, 1.3, rho) == pytest.approx(float(ndtr(1.3)), abs=1e-12)

    def test_comonotone_limits(self):
        from scipy.special import ndtr

        assert bvn_cdf(0.5, 1.0, 1.0) == pytest.approx(float(ndtr(0.5)), abs=1e-14)
        assert bvn_cdf(0.5, -1.0, -1.0) == pytest.approx(
            max(float(ndtr(0.5)) + float(ndtr(-1.0)) - 1.0, 0.0), abs=1e-14)


class TestCopulaIdentities:
    @pytest.mark.parametrize("cop", COPULAS, ids=lambda c: f"{c.copula_id}-{c.theta}")
    def test_boundary_identities(self, cop):
        u = np.linspace(0.0, 1.0, 21)
        np.testing.assert_allclose(copula_eval(cop, u, np.ones_like(u)), u, atol=1e-12)
        np.testing.assert_allclose(copula_eval(cop, np.ones_like(u), u), u, atol=1e-12)
        np.testing.assert_allclose(copula_eval(cop, u, np.zeros_like(u)), 0.0, atol=1e-15)
        np.testing.assert_allclose(copula_eval(cop, np.zeros_like(u), u), 0.0, atol=1e-15)

    def test_independence_values(self):
        assert copula_eval(GumbelHougaardCopula(1.0), 0.4, 0.5) == pytest.approx(0.2, rel=1e-12)
        assert copula_eval(GaussianCopula(0.0), 0.4, 0.5) == pytest.approx(0.2, rel=1e-10)
        assert copula_eval(IndependenceCopula(), 0.4, 0.5) == pytest.approx(0.2, rel=1e-15)

    def test_hougaard_r1_equals_independence(self):
        rng = np.random.default_rng(0)
        u = rng.uniform(size=(50, 2))
        gh = GumbelHougaardCopula(1.0)
        np.testing.assert_allclose(gh.cdf(u[:, 0], u[:, 1]), u[:, 0] * u[:, 1],
                                   rtol=1e-12)

    @pytest.mark.parametrize("cop", COPULAS, ids=lambda c: f"{c.copula_id}-{c.theta}")
    def test_two_increasing_on_grid(self, cop):
        grid = np.linspace(0.02, 0.98, 13)
        c = np.array([[float(cop.cdf(a, b)) for b in grid] for a in grid])
        rect = c[1:, 1:] - c[:-1, 1:] - c[1:, :-1] + c[:-1, :-1]
        assert np.min(rect) >= -1e-10

    @given(a1=st.floats(0.01, 0.97), a2=st.floats(0.01, 0.97),
           d1=st.floats(0.01, 0.5), d2=st.floats(0.01, 0.5))
    @settings(max_examples=40, deadline=None)
    def test_two_increasing_random_rectangles(self, a1, a2, d1, d2):
        cop = GumbelHougaardCopula(0.45)
        b1 = min(a1 + d1, 1.0)
        b2 = min(a2 + d2, 1.0)
        mass = (cop.cdf(b1, b2) - cop.cdf(a1, b2) - cop.cdf(b1, a2)
                + cop.cdf(a1, a2))
        assert mass >= -1e-12

    def test_gumbel_partial_u1_matches_finite_differences(self):
        cop = GumbelHougaardCopula(0.35)
        u1 = np.array([0.2, 0.5, 0.8])
        u2 = np.array([0.3, 0.6, 0.9])
        h = 1e-6
        fd = (cop.cdf(u1 + h, u2) - cop.cdf(u1 - h, u2)) / (2 * h)
        np.testing.assert_allclose(cop.partial_u1(u1, u2), fd, rtol=1e-7)

    def test_gaussian_partial_u1_matches_finite_differences(self):
        cop = GaussianCopula(0.55)
        u1 = np.array([0.2, 0.5, 0.8])
        u2 = np.array([0.3, 0.6, 0.9])
        h = 1e-6
        fd = (cop.cdf(u1 + h, u2) - cop.cdf(u1 - h, u2)) / (2 * h)
        np.testing.assert_allclose(cop.partial_u1(u1, u2), fd, rtol=1e-6)


class TestSampling:
    def test_positive_stable_laplace_transform(self):
        rng = np.random.default_rng(21)
        for alpha in (0.25, 0.5, 0.75):
            v = sample_positive_stable(alpha, 300_000, rng)
            for t in (0.5, 1.0, 2.0):
                target = math.exp(-(t**alpha))
                est = float(np.mean(np.exp(-t * v)))
                se = float(np.std(np.exp(-t * v), ddof=1)) / math.sqrt(v.size)
                assert abs(est - target) < 5.0 * se

    def test_positive_stable_domain(self):
        with pytest.raises(ParameterDomainError):
            sample_positive_stable(1.2, 10, np.random.default_rng(0))

    @pytest.mark.parametrize("r", [0.25, 0.5, 0.75])
    def test_hougaard_kendall_tau(self, r):
        """Kendall's tau of the logistic extreme-value copula equals 1 - r."""
        cop = GumbelHougaardCopula(r)
        u1, u2 = cop.sample(40_000, np.random.default_rng(17))
        tau = stats.kendalltau(u1, u2).statistic
        assert abs(tau - (1.0 - r)) < 0.015

    @pytest.mark.parametrize("cop", COPULAS, ids=lambda c: f"{c.copula_id}-{c.theta}")
    def test_uniform_margins(self, cop):
        u1, u2 = cop.sample(100_000, np.random.default_rng(23))
        crit = 1.6276 / math.sqrt(u1.size)
        assert stats.kstest(u1, "uniform").statistic < crit
        assert stats.kstest(u2, "uniform").statistic < crit

    def test_sampling_determinism(self):
        cop = GumbelHougaardCopula(0.5)
        a = cop.sample(1000, np.random.default_rng(9))
        b = cop.sample(1000, np.random.default_rng(9))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_copula_cdf_law(self):
        """Empirical joint cdf of samples matches C(u1, u2) on a grid."""
        cop = GumbelHougaardCopula(0.4)
        u1, u2 = cop.sample(200_000, np.random.default_rng(31))
        for a, b in [(0.3, 0.4), (0.5, 0.5), (0.7, 0.2), (0.9, 0.9)]:
            emp = float(np.mean((u1 <= a) & (u2 <= b)))
            assert abs(emp - cop.cdf(a, b)) < 0.004


def test_copula_registry():
    assert isinstance(copula_from_id("gaussian", 0.4), GaussianCopula)
    assert isinstance(copula_from_id("gumbel-hougaard", 0.4), GumbelHougaardCopula)
    assert isinstance(copula_from_id("independence"), IndependenceCopula)
    with pytest.raises(ParameterDomainError):
        copula_from_id("clayton", 0.5)
