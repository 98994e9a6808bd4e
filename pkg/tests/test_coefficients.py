"""Optimal combination coefficients: closed form vs a brute-force minimizer."""

import numpy as np
import pytest
from scipy import optimize

from mfmc._coeffs import MomentMatrices, component_objective, mf_sigma, optimal_alpha
from mfmc.errors import SingularityError


def random_moment_matrices(rng, d=2):
    """Blocks of a random PSD covariance of (h(X1), h(X2))."""
    a = rng.normal(size=(2 * d, 2 * d + 3))
    full = a @ a.T / (2 * d + 3) + 0.05 * np.eye(2 * d)
    return MomentMatrices(full[:d, :d], full[:d, d:], full[d:, d:])


def quadratic_objective(mm, jac, component, factor=1.0):
    """Component variance as an explicit double sum over feature pairs."""
    g = np.atleast_2d(jac)[component]

    def objective(alpha):
        total = 0.0
        for r in range(mm.d1):
            for s in range(mm.d1):
                cov_rs = (mm.c_hh[r, s]
                          - factor * (alpha[s] * mm.c_hl[r, s]
                                      + alpha[r] * mm.c_hl[s, r]
                                      - alpha[r] * alpha[s] * mm.c_ll[r, s]))
                total += g[r] * g[s] * cov_rs
        return total

    return objective


class TestClosedFormAgainstMinimizer:
    @pytest.mark.parametrize("seed", range(12))
    def test_matches_numerical_minimizer(self, seed):
        rng = np.random.default_rng(seed)
        mm = random_moment_matrices(rng)
        jac = rng.normal(size=(2, 2))
        for l in range(2):
            alpha = optimal_alpha(mm, jac, l)
            obj = quadratic_objective(mm, jac, l)
            res = optimize.minimize(obj, np.zeros(2), method="Nelder-Mead",
                                    options={"xatol": 1e-12, "fatol": 1e-14,
                                             "maxiter": 10_000})
            np.testing.assert_allclose(alpha, res.x, atol=1e-6)

    @pytest.mark.parametrize("seed", range(6))
    def test_zero_jacobian_entry_reduction(self, seed):
        rng = np.random.default_rng(100 + seed)
        mm = random_moment_matrices(rng)
        jac = np.array([[1.3, 0.0], [0.0, -0.7]])
        a0 = optimal_alpha(mm, jac, 0)
        a1 = optimal_alpha(mm, jac, 1)
        assert a0[1] == 0.0 and a1[0] == 0.0
        np.testing.assert_allclose(a0[0], mm.c_hl[0, 0] / mm.v_l[0], rtol=1e-12)
        np.testing.assert_allclose(a1[1], mm.c_hl[1, 1] / mm.v_l[1], rtol=1e-12)

    def test_perturbation_never_improves(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            mm = random_moment_matrices(rng)
            jac = rng.normal(size=(2, 2))
            for l in range(2):
                alpha = optimal_alpha(mm, jac, l)
                obj = quadratic_objective(mm, jac, l)
                base = obj(alpha)
                for j in range(2):
                    for sign in (-1.0, 1.0):
                        bumped = alpha.copy()
                        bumped[j] += sign * 1e-3
                        assert obj(bumped) >= base - 1e-12

    def test_three_feature_general_solve(self):
        rng = np.random.default_rng(42)
        mm = random_moment_matrices(rng, d=3)
        jac = rng.normal(size=(3, 3))
        alpha = optimal_alpha(mm, jac, 1)
        obj = quadratic_objective(mm, jac, 1)
        res = optimize.minimize(obj, np.zeros(3), method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-14,
                                         "maxiter": 20_000})
        np.testing.assert_allclose(alpha, res.x, atol=1e-5)


class TestGaussianSpecialization:
    @staticmethod
    def gaussian_blocks(mu1, s1, mu2, s2, rho):
        """Feature moments of (x, x^2) pairs under the bivariate normal."""
        c_hh = np.array([[s1**2, 2 * mu1 * s1**2],
                         [2 * mu1 * s1**2, 2 * s1**4 + 4 * mu1**2 * s1**2]])
        c_ll = np.array([[s2**2, 2 * mu2 * s2**2],
                         [2 * mu2 * s2**2, 2 * s2**4 + 4 * mu2**2 * s2**2]])
        c_hl = np.array([
            [s1 * s2 * rho, 2 * mu2 * s1 * s2 * rho],
            [2 * mu1 * s1 * s2 * rho,
             2 * s1**2 * s2**2 * rho**2 + 4 * mu1 * mu2 * s1 * s2 * rho],
        ])
        jac = np.array([[1.0, 0.0], [-2.0 * mu1, 1.0]])
        return MomentMatrices(c_hh, c_hl, c_ll), jac

    @pytest.mark.parametrize("seed", range(10))
    def test_location_and_scale_coefficients(self, seed):
        rng = np.random.default_rng(200 + seed)
        mu1 = rng.uniform(0.5, 3.0)
        mu2 = rng.uniform(0.5, 3.0)
        s1 = rng.uniform(0.5, 4.0)
        s2 = rng.uniform(0.5, 4.0)
        rho = rng.uniform(-0.9, 0.9)
        mm, jac = self.gaussian_blocks(mu1, s1, mu2, s2, rho)
        slope = rho * s1 / s2
        np.testing.assert_allclose(optimal_alpha(mm, jac, 0), [slope, 0.0],
                                   atol=1e-10)
        np.testing.assert_allclose(optimal_alpha(mm, jac, 1),
                                   [mu2 / mu1 * slope**2, slope**2], atol=1e-10)

    def test_named_example_values(self):
        mm, jac = self.gaussian_blocks(2.0, 4.0, 2.0, 1.0, 0.5)
        np.testing.assert_allclose(optimal_alpha(mm, jac, 0), [2.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(optimal_alpha(mm, jac, 1), [4.0, 4.0], atol=1e-12)


class TestDegenerateInputs:
    def test_perfectly_correlated_features(self):
        c = np.array([[1.0, 1.0], [1.0, 1.0]])
        mm = MomentMatrices(np.eye(2), 0.5 * np.eye(2), c)
        with pytest.raises(SingularityError):
            optimal_alpha(mm, np.eye(2) + 1.0, 0)

    def test_all_zero_jacobian_row(self):
        rng = np.random.default_rng(3)
        mm = random_moment_matrices(rng)
        with pytest.raises(SingularityError):
            optimal_alpha(mm, np.array([[0.0, 0.0], [1.0, 1.0]]), 0)

    def test_cauchy_schwarz_guard(self):
        with pytest.raises(ValueError):
            MomentMatrices(np.eye(2), 3.0 * np.ones((2, 2)), np.eye(2))


def test_sigma_assembly_matches_objective_at_common_alpha():
    rng = np.random.default_rng(5)
    mm = random_moment_matrices(rng)
    jac = rng.normal(size=(2, 2))
    alpha = rng.normal(size=2)
    rows = np.tile(alpha, (2, 1))
    sigma = mf_sigma(mm, jac, rows, factor=0.8)
    for l in range(2):
        obj = quadratic_objective(mm, jac, l, factor=0.8)
        assert sigma[l, l] == pytest.approx(obj(alpha), rel=1e-12)
        assert component_objective(mm, jac, l, factor=0.8)(alpha) == pytest.approx(
            obj(alpha), rel=1e-12)
