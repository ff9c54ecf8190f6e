import numpy as np
import pytest

from gapdecomp.errors import DomainError, EmptySampleError
from gapdecomp.ols import EffectEstimate, ate_mean_difference, ate_ols_controls, fit_ols
from gapdecomp.numkit import normal_cdf


class TestMeanDifference:

    def test_exact_means(self):
        e = ate_mean_difference([1, 1, 3, 3], [0, 0, 1, 1])
        assert e.estimate == 2.0

    def test_welch_by_hand(self):
        e = ate_mean_difference([0, 2, 1, 5], [0, 0, 1, 1])
        assert e.estimate == 2.0
        assert e.standard_error == pytest.approx(np.sqrt(2 / 2 + 8 / 2), abs=1e-12)

    def test_identical_groups(self):
        e = ate_mean_difference([1, 2, 1, 2], [0, 0, 1, 1])
        assert e.estimate == 0.0 and e.p_value == 1.0

    def test_empty_group(self):
        with pytest.raises(EmptySampleError):
            ate_mean_difference([1, 2, 3], [1, 1, 1])

    def test_pvalue_formula(self):
        e = ate_mean_difference([0, 2, 1, 5, 3, 4], [0, 0, 0, 1, 1, 1])
        z = abs(e.estimate / e.standard_error)
        assert e.p_value == pytest.approx(2 * (1 - normal_cdf(z)), abs=1e-14)


class TestFitOls:

    @pytest.fixture
    def heteroscedastic(self, rng):
        n = 120
        x = np.column_stack([np.ones(n), rng.standard_normal((n, 2))])
        y = x @ [1.0, 0.5, -2.0] + rng.standard_normal(n) * (1 + np.abs(x[:, 1]))
        return x, y

    @pytest.mark.parametrize("cov_type", ["HC0", "HC1", "HC3"])
    def test_sandwich_against_direct_formula(self, heteroscedastic, cov_type):
        x, y = heteroscedastic
        n, k = x.shape
        bread = np.linalg.inv(x.T @ x)
        b = bread @ x.T @ y
        e = y - x @ b
        if cov_type == "HC3":
            h = np.einsum("ij,jk,ik->i", x, bread, x)
            e = e / (1 - h)
        meat = x.T @ (x * (e ** 2)[:, None])
        cov = bread @ meat @ bread
        if cov_type == "HC1":
            cov *= n / (n - k)
        fit = fit_ols(x, y, cov_type)
        np.testing.assert_allclose(fit.coefficients, b, rtol=1e-10)
        np.testing.assert_allclose(fit.robust_covariance, cov, rtol=1e-9)

    def test_residual_orthogonality_and_psd(self, heteroscedastic):
        x, y = heteroscedastic
        fit = fit_ols(x, y)
        assert np.max(np.abs(x.T @ fit.residuals)) <= 1e-8
        cov = fit.robust_covariance
        np.testing.assert_array_equal(cov, cov.T)
        assert np.linalg.eigvalsh(cov).min() >= -1e-12

    def test_unknown_cov_type(self, heteroscedastic):
        with pytest.raises(DomainError):
            fit_ols(*heteroscedastic, cov_type="HC9")


class TestOlsControls:

    def test_orthogonal_control(self):
        d = np.array([0, 0, 0, 0, 1, 1, 1, 1], float)
        w = np.array([1, -1, 1, -1, 1, -1, 1, -1], float)
        y = np.array([1.0, 2.0, 3.0, 2.5, 4.0, 6.0, 5.0, 5.5])
        # w has mean zero within each treatment arm and is orthogonal to y
        y = y - w * (w @ y) / (w @ w)
        a = ate_ols_controls(y, d, w)
        b = ate_mean_difference(y, d)
        assert a.estimate == pytest.approx(b.estimate, abs=1e-10)

    def test_exact_fit(self, rng):
        w = rng.standard_normal(30)
        d = (np.arange(30) % 2).astype(float)
        e = ate_ols_controls(2 * d + w, d, w)
        assert e.estimate == pytest.approx(2.0, abs=1e-10)
        assert e.standard_error == pytest.approx(0.0, abs=1e-10)

    def test_confounded(self, rng):
        n = 200
        w = rng.standard_normal((n, 2))
        d = (w[:, 0] + rng.standard_normal(n) > 0).astype(float)
        y = 1.0 * d + w @ [2.0, -1.0] + rng.standard_normal(n)
        ols = ate_ols_controls(y, d, w)
        raw = ate_mean_difference(y, d)
        x = np.column_stack([np.ones(n), d, w])
        oracle = np.linalg.lstsq(x, y, rcond=None)[0][1]
        assert ols.estimate == pytest.approx(oracle, abs=1e-10)
        assert abs(ols.estimate - 1.0) < abs(raw.estimate - 1.0)


def test_unknown_kind():
    with pytest.raises(DomainError):
        EffectEstimate(0.0, 1.0, 1.0, "magic", 3)
