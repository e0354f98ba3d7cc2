"""Quasi-GLM fitting by iteratively reweighted least squares.

This is the single fitting primitive behind both sub-models of the joint
mean/dispersion machinery: the mean model is fitted with prior weights
1/phi_i and the dispersion model is a Gamma/log fit to the standardized
deviance components with prior weights (1 - h_i)/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import DomainError, NonConvergence, SingularDesign
from .families import Family

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class DesignMatrix:
    """A labelled n x p model matrix.

    The intercept column, when present, is labelled "1" and comes first.
    """

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        if values.ndim != 2:
            raise DomainError("design matrix must be two-dimensional")
        if len(self.labels) != values.shape[1]:
            raise DomainError("design labels do not match column count")
        if len(set(self.labels)) != len(self.labels):
            raise DomainError("design column labels must be unique")
        if "1" in self.labels and self.labels[0] != "1":
            raise DomainError("the intercept column '1' must come first")
        if values.shape[0] < values.shape[1]:
            raise SingularDesign(
                f"more columns than observations (n={values.shape[0]}, p={values.shape[1]})"
            )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FittedGlm:
    """One converged quasi-GLM fit."""

    coefficients: np.ndarray
    fitted_means: np.ndarray
    linear_predictor: np.ndarray
    deviance_components: np.ndarray
    hat_values: np.ndarray
    prior_weights: np.ndarray
    working_weights: np.ndarray
    converged: bool
    iterations: int
    family: Family
    labels: tuple[str, ...]
    design: np.ndarray
    response: np.ndarray

    @property
    def total_deviance(self) -> float:
        return float(np.sum(self.deviance_components))

    @property
    def weighted_deviance(self) -> float:
        return float(np.sum(self.prior_weights * self.deviance_components))

    @property
    def n(self) -> int:
        return self.fitted_means.shape[0]

    @property
    def p(self) -> int:
        return self.coefficients.shape[0]


def _as_design(design) -> DesignMatrix:
    if isinstance(design, DesignMatrix):
        return design
    values = np.asarray(design, dtype=np.float64)
    return DesignMatrix(tuple(f"c{j}" for j in range(values.shape[1])), values)


def irls_fit(
    design,
    response,
    family: Family,
    prior_weights=None,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FittedGlm:
    """Fit one quasi-GLM.

    Parameters
    ----------
    design : DesignMatrix or array_like
        n x p model matrix, full column rank.
    response : array_like
        Observations, in the family's response domain.
    family : Family
        Variance function and link.
    prior_weights : array_like, optional
        Strictly positive per-observation weights (default all one).

    Raises
    ------
    SingularDesign, NonConvergence, DomainError
    """
    dm = _as_design(design)
    y = family.check_response(np.asarray(response, dtype=np.float64))
    if y.shape[0] != dm.n:
        raise DomainError("response length does not match the design matrix")
    if prior_weights is None:
        w_prior = np.ones(dm.n)
    else:
        w_prior = np.ascontiguousarray(np.asarray(prior_weights, dtype=np.float64))
        if w_prior.shape[0] != dm.n:
            raise DomainError("prior weights length does not match the design matrix")
        if not np.all(np.isfinite(w_prior)) or np.any(w_prior <= 0.0):
            raise DomainError("prior weights must be finite and > 0")

    y = np.ascontiguousarray(y)
    beta, eta, mu, work_w, dev, n_iter, status = K.irls(
        dm.values,
        y,
        w_prior,
        family.kind_code,
        family.link_code,
        family.m,
        tol,
        max_iter,
    )
    if status == K.STATUS_SINGULAR:
        raise SingularDesign("weighted normal equations are rank deficient")
    if status == K.STATUS_MAXITER:
        raise NonConvergence(f"IRLS did not converge in {max_iter} iterations")

    h, ok = K.hat_diag(dm.values, work_w)
    if not ok:
        raise SingularDesign("hat-value computation met a rank-deficient design")

    return FittedGlm(
        coefficients=beta,
        fitted_means=mu,
        linear_predictor=eta,
        deviance_components=dev,
        hat_values=h,
        prior_weights=w_prior,
        working_weights=work_w,
        converged=status == K.STATUS_OK,
        iterations=int(n_iter),
        family=family,
        labels=dm.labels,
        design=dm.values,
        response=y,
    )


def deviance_components(response, fitted_means, family: Family) -> np.ndarray:
    """Per-observation deviance components d_i.

    Closed forms per family; Normal gives squared error, Gamma gives
    2(-log(y/mu) + (y - mu)/mu), with the y log y -> 0 convention at the
    Poisson/Binomial domain edges.
    """
    y = family.check_response(np.asarray(response, dtype=np.float64))
    mu = family.check_mean(np.asarray(fitted_means, dtype=np.float64))
    if y.shape != mu.shape:
        raise DomainError("response and fitted means must have equal length")
    return K.deviance_vec(
        np.ascontiguousarray(y), np.ascontiguousarray(mu), family.kind_code, family.m
    )


def hat_values(design, working_weights) -> np.ndarray:
    """Diagonal of the weighted projection matrix H."""
    dm = _as_design(design)
    w = np.ascontiguousarray(np.asarray(working_weights, dtype=np.float64))
    if w.shape[0] != dm.n:
        raise DomainError("working weights length does not match the design matrix")
    if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
        raise DomainError("working weights must be finite and > 0")
    h, ok = K.hat_diag(dm.values, w)
    if not ok:
        raise SingularDesign("design is rank deficient at the given weights")
    return h


def coefficient_covariance(fit: FittedGlm) -> np.ndarray:
    """Model-based covariance (X'WX)^-1 at the converged working weights."""
    X = fit.design
    A = (X * fit.working_weights[:, None]).T @ X
    return np.linalg.inv(A)
