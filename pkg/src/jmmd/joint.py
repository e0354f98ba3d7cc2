"""The interlinked mean/dispersion fit.

One outer cycle fits the mean GLM with prior weights 1/phi, standardizes
its deviance components by the leverages, fits a Gamma/log GLM to those
standardized components with prior weights (1 - h)/2, and reads the next
phi off that dispersion fit.  Cycling continues until the adjusted
extended quasi-likelihood stabilizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import DomainError, NonConvergence
from .families import Family, Kind, Link
from .glm import FittedGlm, irls_fit

DEFAULT_OUTER_TOL = 1e-8
DEFAULT_MAX_OUTER = 50

# Exact-fit deviance components are floored before entering Gamma-domain
# computations, where log d* would otherwise blow up.
DSTAR_FLOOR = 1e-12


@dataclass(frozen=True)
class JointSpec:
    """Term sets and families for one joint mean/dispersion model."""

    mean_terms: tuple[str, ...]
    disp_terms: tuple[str, ...]
    mean_family: Family
    disp_family: Family = field(default_factory=Family.gamma_dispersion)

    def __post_init__(self):
        object.__setattr__(self, "mean_terms", tuple(self.mean_terms))
        object.__setattr__(self, "disp_terms", tuple(self.disp_terms))
        if "1" not in self.mean_terms or "1" not in self.disp_terms:
            raise DomainError("both sub-models must contain the intercept term '1'")
        if self.disp_family.kind is not Kind.GAMMA_DISP or self.disp_family.link is not Link.LOG:
            raise DomainError("the dispersion sub-model must be Gamma with log link")

    @property
    def p(self) -> int:
        return len(self.mean_terms)

    @property
    def q(self) -> int:
        return len(self.disp_terms)


@dataclass(frozen=True)
class JointFit:
    """A converged (or capped) joint fit."""

    mean_fit: FittedGlm
    disp_fit: FittedGlm
    phi_hat: np.ndarray
    std_deviance: np.ndarray
    eql: float
    outer_iterations: int
    converged: bool
    spec: JointSpec


def standardized_deviance(d, h) -> np.ndarray:
    """d*_i = d_i / (1 - h_i)."""
    d = np.asarray(d, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if d.shape != h.shape:
        raise DomainError("deviance and hat vectors must have equal length")
    if np.any(h < 0.0) or np.any(h >= 1.0 - 1e-10):
        raise DomainError("hat values must lie in [0, 1)")
    return d / (1.0 - h)


def extended_quasi_likelihood(y, mu, phi, std_dev, family: Family) -> float:
    """Adjusted extended quasi-likelihood Q+.

    Q+ = sum_i -1/2 ( d*_i / phi_i + log(2 pi phi_i V(y_i)) ), with V(y)
    evaluated through the family's edge guard.
    """
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    dstar = np.asarray(std_dev, dtype=np.float64)
    if np.any(phi <= 0.0):
        raise DomainError("dispersions must be > 0")
    del mu  # the fitted means enter only through d*
    vy = family.variance_at_response(y)
    if np.any(vy <= 0.0):
        raise DomainError("guarded V(y) must be > 0")
    return float(np.sum(-0.5 * (dstar / phi + np.log(2.0 * np.pi * phi * vy))))


def fit_joint(
    data: Dataset,
    spec: JointSpec,
    control: dict | None = None,
) -> JointFit:
    """Run the alternating mean/dispersion fit to convergence.

    ``control`` may override ``tol`` (relative Q+ change, default 1e-8)
    and ``max_outer`` (default 50).  Raises ``NonConvergence`` with the
    last state attached when the cap is hit.
    """
    control = control or {}
    tol = float(control.get("tol", DEFAULT_OUTER_TOL))
    max_outer = int(control.get("max_outer", DEFAULT_MAX_OUTER))

    y = data.response
    n = data.n
    if n <= spec.p or n <= spec.q:
        raise DomainError("joint fit needs n greater than both sub-model sizes")
    X = data.design(spec.mean_terms)
    Z = data.design(spec.disp_terms)

    phi = np.ones(n)
    q_prev = None
    state = None
    converged = False
    outer = 0
    for outer in range(1, max_outer + 1):
        mean_fit = irls_fit(X, y, spec.mean_family, prior_weights=1.0 / phi)
        dstar = np.maximum(
            standardized_deviance(mean_fit.deviance_components, mean_fit.hat_values),
            DSTAR_FLOOR,
        )
        omega = (1.0 - mean_fit.hat_values) / 2.0
        disp_fit = irls_fit(Z, dstar, spec.disp_family, prior_weights=omega)
        phi = disp_fit.fitted_means
        q_plus = extended_quasi_likelihood(y, mean_fit.fitted_means, phi, dstar, spec.mean_family)
        state = (mean_fit, disp_fit, phi, dstar, q_plus)
        if q_prev is not None and abs(q_plus - q_prev) / (abs(q_plus) + 1.0) < tol:
            converged = True
            break
        q_prev = q_plus

    mean_fit, disp_fit, phi, dstar, q_plus = state
    fit = JointFit(
        mean_fit=mean_fit,
        disp_fit=disp_fit,
        phi_hat=phi,
        std_deviance=dstar,
        eql=q_plus,
        outer_iterations=outer,
        converged=converged,
        spec=spec,
    )
    if not converged:
        raise NonConvergence(f"joint fit did not stabilize in {max_outer} cycles", last_fit=fit)
    return fit
