import numpy as np
import pytest
from scipy.integrate import quad

from jmmd import (
    DesignMatrix,
    Family,
    deviance_components,
    hat_values,
    irls_fit,
    standardized_deviance,
)
from jmmd.errors import DomainError, SingularDesign

rng = np.random.default_rng(42)


class TestIrlsFit:
    def test_two_point_exact_interpolation(self):
        fit = irls_fit(
            [[1.0, 0.0], [1.0, 1.0]], [1.0, 3.0], Family.normal_type(), [1.0, 1.0]
        )
        assert fit.coefficients == pytest.approx([1.0, 2.0], abs=1e-12)
        assert fit.total_deviance == pytest.approx(0.0, abs=1e-20)

    def test_intercept_only_gives_sample_mean_and_flat_hats(self):
        y = rng.normal(size=9)
        fit = irls_fit(np.ones((9, 1)), y, Family.normal_type())
        assert fit.coefficients[0] == pytest.approx(y.mean(), abs=1e-12)
        assert fit.hat_values == pytest.approx(np.full(9, 1.0 / 9.0), abs=1e-12)

    def test_normal_identity_matches_ols(self):
        n = 40
        X = np.column_stack([np.ones(n), rng.normal(size=n), rng.normal(size=n)])
        y = rng.normal(size=n)
        fit = irls_fit(X, y, Family.normal_type())
        beta_ols = np.linalg.solve(X.T @ X, X.T @ y)
        assert fit.coefficients == pytest.approx(beta_ols, abs=1e-10)

    def test_prior_weight_rescaling_leaves_coefficients(self):
        n = 30
        X = np.column_stack([np.ones(n), rng.normal(size=n)])
        y = rng.poisson(3.0, size=n).astype(float)
        w = rng.uniform(0.5, 2.0, size=n)
        fit1 = irls_fit(X, y, Family.poisson_type(), w)
        fit2 = irls_fit(X, y, Family.poisson_type(), 7.3 * w)
        assert fit1.coefficients == pytest.approx(fit2.coefficients, abs=1e-10)

    def test_nested_deviance_monotone(self):
        n = 60
        X = np.column_stack([np.ones(n), rng.normal(size=n), rng.normal(size=n)])
        mu = np.exp(0.5 + 0.4 * X[:, 1])
        y = rng.poisson(mu).astype(float)
        small = irls_fit(X[:, :2], y, Family.poisson_type())
        big = irls_fit(X, y, Family.poisson_type())
        assert big.total_deviance <= small.total_deviance + 1e-8

    def test_binomial_fit_recovers_signal(self):
        n = 400
        x = rng.uniform(-1, 1, size=n)
        X = np.column_stack([np.ones(n), x])
        pi = 1.0 / (1.0 + np.exp(-(0.3 + 1.2 * x)))
        y = rng.binomial(8, pi).astype(float)
        fit = irls_fit(X, y, Family.binomial_type(8))
        assert fit.converged
        assert fit.coefficients == pytest.approx([0.3, 1.2], abs=0.35)

    def test_singular_design_raises(self):
        n = 12
        x = rng.normal(size=n)
        X = np.column_stack([np.ones(n), x, 2.0 * x])
        with pytest.raises(SingularDesign):
            irls_fit(X, rng.normal(size=n), Family.normal_type())

    def test_domain_violation_raises(self):
        with pytest.raises(DomainError):
            irls_fit(np.ones((4, 1)), [1.0, -1.0, 2.0, 3.0], Family.poisson_type())

    def test_weights_must_be_positive(self):
        with pytest.raises(DomainError):
            irls_fit(np.ones((3, 1)), [1.0, 2.0, 3.0], Family.normal_type(), [1.0, 0.0, 1.0])


class TestDevianceComponents:
    def test_normal_squared_error(self):
        d = deviance_components([2.0], [1.0], Family.normal_type())
        assert d[0] == pytest.approx(1.0)

    def test_poisson_perfect_fit(self):
        d = deviance_components([5.0], [5.0], Family.poisson_type())
        assert d[0] == pytest.approx(0.0, abs=1e-14)

    def test_gamma_closed_form_and_quadrature(self):
        d = deviance_components([2.0], [1.0], Family.gamma_dispersion())
        assert d[0] == pytest.approx(2.0 * (1.0 - np.log(2.0)), rel=1e-12)
        integral, _ = quad(lambda t: 2.0 * (2.0 - t) / t**2, 1.0, 2.0)
        assert d[0] == pytest.approx(integral, rel=1e-10)

    @pytest.mark.parametrize(
        "family,y,mu",
        [
            (Family.poisson_type(), 3.0, 1.7),
            (Family.binomial_type(10), 7.0, 4.2),
            (Family.normal_type(), -1.0, 2.0),
        ],
        ids=["poisson", "binomial", "normal"],
    )
    def test_matches_variance_integral(self, family, y, mu):
        d = deviance_components([y], [mu], family)[0]
        integral, _ = quad(
            lambda t: 2.0 * (y - t) / family.variance(t), mu, y, limit=200
        )
        assert d == pytest.approx(integral, rel=1e-8)

    def test_edge_conventions(self):
        d0 = deviance_components([0.0], [2.0], Family.poisson_type())
        assert d0[0] == pytest.approx(4.0)
        dm = deviance_components([10.0], [6.0], Family.binomial_type(10))
        assert dm[0] == pytest.approx(2.0 * 10.0 * np.log(10.0 / 6.0))

    def test_nonnegative_and_zero_iff_equal(self):
        y = np.array([0.5, 1.0, 4.0])
        mu = np.array([0.5, 2.0, 4.0])
        d = deviance_components(y, mu, Family.poisson_type())
        assert np.all(d >= 0.0)
        assert d[0] == pytest.approx(0.0, abs=1e-14)
        assert d[1] > 0.0


class TestHatValues:
    def test_intercept_only_equal_weights(self):
        h = hat_values(np.ones((4, 1)), np.ones(4))
        assert h == pytest.approx([0.25] * 4)

    def test_trace_equals_column_count(self):
        n, p = 25, 4
        X = np.column_stack([np.ones(n)] + [rng.normal(size=n) for _ in range(p - 1)])
        w = rng.uniform(0.2, 3.0, size=n)
        h = hat_values(X, w)
        assert h.sum() == pytest.approx(p, abs=1e-8)
        assert np.all(h >= 0.0) and np.all(h < 1.0)

    def test_three_point_line(self):
        X = np.array([[1.0, -1.0], [1.0, 0.0], [1.0, 1.0]])
        h = hat_values(X, np.ones(3))
        assert h == pytest.approx([5.0 / 6.0, 1.0 / 3.0, 5.0 / 6.0], abs=1e-12)
        A = X.T @ X
        dense = np.diag(X @ np.linalg.inv(A) @ X.T)
        assert h == pytest.approx(dense, abs=1e-12)

    def test_saturated_boundary(self):
        # p = n: hat values hit 1 and the d* standardization rejects them
        fit = irls_fit(
            [[1.0, 0.0], [1.0, 1.0]], [1.0, 3.0], Family.normal_type(), [1.0, 1.0]
        )
        assert fit.hat_values == pytest.approx([1.0, 1.0], abs=1e-10)
        with pytest.raises(DomainError):
            standardized_deviance(fit.deviance_components, fit.hat_values)


class TestInjectionMoldingMeanModel:
    def test_table_coefficients_under_converged_weights(self, molding_data):
        # weighted refit of the hierarchy-completed model at the selection state
        from jmmd.demo import run_injection_demo

        res = run_injection_demo()
        by_term = {r["term"]: r["estimate"] for r in res["mean_coefficients"]}
        assert by_term["1"] == pytest.approx(2.24903, abs=5e-4)
        assert by_term["A"] == pytest.approx(0.42802, abs=5e-4)
        assert by_term["D"] == pytest.approx(-0.28639, abs=5e-4)


def test_design_matrix_invariants():
    with pytest.raises(DomainError):
        DesignMatrix(("a", "a"), np.ones((3, 2)))
    with pytest.raises(DomainError):
        DesignMatrix(("x", "1"), np.ones((3, 2)))
    with pytest.raises(SingularDesign):
        DesignMatrix(("1", "x", "z"), np.ones((2, 3)))
