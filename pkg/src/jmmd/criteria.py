"""Goodness-of-fit criteria for the mean and dispersion sub-models.

The adjusted R-squared family measures unexplained variation with the
squared arc length of the variance function (optionally weighted by the
dispersion), penalised by a sample-size-growing degrees-of-freedom factor
lambda_n in {sqrt(n), log(n), 1}.  The likelihood criteria are the
extended Akaike criterion for the mean model and a corrected Akaike
criterion for the Gamma dispersion model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateResponse, DomainError, PenaltyOverflow
from .families import Family, Kind
from .glm import FittedGlm


class Direction(Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class LambdaChoice(Enum):
    SQRT_N = "sqrt"
    LOG_N = "log"
    UNIT = "unit"

    def value_at(self, n: int) -> float:
        if self is LambdaChoice.SQRT_N:
            return math.sqrt(n)
        if self is LambdaChoice.LOG_N:
            return math.log(n)
        return 1.0


class MeanCriterion(Enum):
    R2_SQRT = "r2-sqrt"
    R2_LOG = "r2-log"
    R2_UNIT = "r2-unit"
    EAIC = "eaic"

    @property
    def direction(self) -> Direction:
        return Direction.MINIMIZE if self is MeanCriterion.EAIC else Direction.MAXIMIZE

    @property
    def lambda_choice(self) -> LambdaChoice | None:
        return _LAMBDA_BY_NAME.get(self.value)


class DispCriterion(Enum):
    R2_SQRT = "r2-sqrt"
    R2_LOG = "r2-log"
    R2_UNIT = "r2-unit"
    AICC = "aicc"

    @property
    def direction(self) -> Direction:
        return Direction.MINIMIZE if self is DispCriterion.AICC else Direction.MAXIMIZE

    @property
    def lambda_choice(self) -> LambdaChoice | None:
        return _LAMBDA_BY_NAME.get(self.value)


_LAMBDA_BY_NAME = {
    "r2-sqrt": LambdaChoice.SQRT_N,
    "r2-log": LambdaChoice.LOG_N,
    "r2-unit": LambdaChoice.UNIT,
}


@dataclass(frozen=True)
class CriterionValue:
    """One evaluated criterion, with the bookkeeping behind it."""

    kind: MeanCriterion | DispCriterion
    value: float
    n: int
    params: int
    lambda_n: float | None = None


# ---------------------------------------------------------------------------
# arc-length distances
# ---------------------------------------------------------------------------


def _asinh_form(u):
    """Antiderivative of sqrt(1 + u^2) up to the substitution constant."""
    return u * np.sqrt(1.0 + u * u) + np.arcsinh(u)


def arc_length_distance(a, b, family: Family):
    """Squared arc length of the variance function between a and b.

    Closed forms: Normal (a-b)^2; Poisson 2(a-b)^2; Binomial and Gamma via
    the quadratic-variance antiderivative u sqrt(1+u^2) + asinh(u) at
    u = V'(t).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if family.kind is Kind.NORMAL_TYPE:
        return (a - b) ** 2
    if family.kind is Kind.POISSON_TYPE:
        return 2.0 * (a - b) ** 2
    if family.kind is Kind.BINOMIAL_TYPE:
        m = family.m
        ua = 1.0 - 2.0 * a / m
        ub = 1.0 - 2.0 * b / m
        return (m / 4.0 * (_asinh_form(ua) - _asinh_form(ub))) ** 2
    return (0.25 * (_asinh_form(2.0 * b) - _asinh_form(2.0 * a))) ** 2


def weighted_arc_length_distance(a, b, family: Family, phi):
    """Arc length with the dispersion weighting the variance slope.

    The integrand is sqrt(1 + phi^2 V'(t)^2); Normal stays (b-a)^2 and
    Poisson becomes (1 + phi^2)(b-a)^2.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    if np.any(phi <= 0.0):
        raise DomainError("dispersion weights must be > 0")
    if family.kind is Kind.NORMAL_TYPE:
        return (b - a) ** 2 * np.ones_like(phi)
    if family.kind is Kind.POISSON_TYPE:
        return (1.0 + phi * phi) * (b - a) ** 2
    if family.kind is Kind.BINOMIAL_TYPE:
        m = family.m
        alpha = phi * (1.0 - 2.0 * a / m)
        beta = phi * (1.0 - 2.0 * b / m)
        return (m / (4.0 * phi) * (_asinh_form(alpha) - _asinh_form(beta))) ** 2
    return (1.0 / (4.0 * phi) * (_asinh_form(2.0 * phi * b) - _asinh_form(2.0 * phi * a))) ** 2


# ---------------------------------------------------------------------------
# adjusted R-squared family
# ---------------------------------------------------------------------------


def _check_penalty(n: int, lam: float, r: int) -> None:
    if n <= lam * r:
        raise PenaltyOverflow(f"penalised degrees of freedom n - lambda*r <= 0 (n={n})")


def r2_hu_shao(y, mu_hat, n: int, r: int, lambda_n: float) -> float:
    """Squared-error adjusted R2 with an inflated parameter count."""
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu_hat, dtype=np.float64)
    _check_penalty(n, lambda_n, r)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise DegenerateResponse("response is constant")
    sse = float(np.sum((y - mu) ** 2))
    return 1.0 - (sse / (n - lambda_n * r)) / (sst / (n - 1))


def r2_zhang(y, mu_hat, family: Family, n: int, r: int) -> float:
    """Arc-length adjusted R2 (unit lambda)."""
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu_hat, dtype=np.float64)
    _check_penalty(n, 1.0, r)
    total = float(np.sum(arc_length_distance(y, y.mean(), family)))
    if total == 0.0:
        raise DegenerateResponse("response is constant")
    unexplained = float(np.sum(arc_length_distance(y, mu, family)))
    return 1.0 - (unexplained / (n - r)) / (total / (n - 1))


def r2_mean(
    y,
    mu_hat,
    phi_hat,
    family: Family,
    n: int,
    p: int,
    lambda_choice: LambdaChoice,
) -> float:
    """Adjusted R2 for the mean sub-model of a joint fit.

    Each observation contributes the dispersion-weighted arc length
    divided by its dispersion, so the unexplained and total variation are
    measured on the standardized scale the fit itself is run on.  The
    total variation is taken around the dispersion-weighted mean of y.
    """
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu_hat, dtype=np.float64)
    phi = np.asarray(phi_hat, dtype=np.float64)
    lam = lambda_choice.value_at(n)
    _check_penalty(n, lam, p)
    if np.any(phi <= 0.0):
        raise DomainError("dispersions must be > 0")
    w = 1.0 / phi
    center = float(np.sum(w * y) / np.sum(w))
    total = float(np.sum(weighted_arc_length_distance(y, center, family, phi) * w))
    if total == 0.0:
        raise DegenerateResponse("response is constant")
    unexplained = float(np.sum(weighted_arc_length_distance(y, mu, family, phi) * w))
    return 1.0 - (unexplained / (n - lam * p)) / (total / (n - 1))


def r2_dispersion(d_star, phi_hat, n: int, q: int, lambda_choice: LambdaChoice) -> float:
    """Adjusted R2 for the Gamma dispersion sub-model."""
    dstar = np.maximum(np.asarray(d_star, dtype=np.float64), 1e-12)
    phi = np.asarray(phi_hat, dtype=np.float64)
    lam = lambda_choice.value_at(n)
    _check_penalty(n, lam, q)
    gamma = Family.gamma_dispersion()
    center = float(dstar.mean())
    total = float(np.sum(arc_length_distance(dstar, center, gamma)))
    if total == 0.0:
        raise DegenerateResponse("standardized deviances are constant")
    unexplained = float(np.sum(arc_length_distance(dstar, phi, gamma)))
    return 1.0 - (unexplained / (n - lam * q)) / (total / (n - 1))


# ---------------------------------------------------------------------------
# likelihood criteria
# ---------------------------------------------------------------------------


def eaic(eql: float, p: int, q: int, n: int) -> float:
    """Extended Akaike criterion: -2 Q+ plus the small-sample penalty."""
    kappa = p + q
    if n <= kappa + 1:
        raise PenaltyOverflow(f"EAIC penalty undefined for n={n}, p+q={kappa}")
    return -2.0 * eql + 2.0 * kappa * n / (n - kappa - 1)


def aicc_gamma(disp_fit: FittedGlm, n: int, q: int) -> float:
    """Corrected Akaike criterion for the Gamma dispersion fit.

    The Gamma shape is profiled out with the mean-deviance estimator
    (weighted deviance over the weight total), the log-likelihood is
    evaluated at that shape, and q + 1 parameters are charged: the q
    coefficients plus the shape.
    """
    if n <= q + 1:
        raise PenaltyOverflow(f"AICc penalty undefined for n={n}, q={q}")
    if disp_fit.family.kind is not Kind.GAMMA_DISP:
        raise DomainError("aicc_gamma expects a Gamma dispersion fit")
    w = disp_fit.prior_weights
    y = disp_fit.response
    phi = disp_fit.fitted_means
    disp = float(np.sum(w * disp_fit.deviance_components) / np.sum(w))
    shape = 1.0 / disp
    scale = phi * disp
    log_f = (shape - 1.0) * np.log(y) - y / scale - gammaln(shape) - shape * np.log(scale)
    return -2.0 * float(np.sum(w * log_f)) + 2.0 * (q + 1)
