"""Variance/link families for the mean and dispersion sub-models.

Four families are supported: Normal type (V = 1), Poisson type (V = mu),
Binomial type with index m (V = mu(1 - mu/m)) and the Gamma dispersion
family (V = mu^2).  The Gamma family only admits the log link; it models
per-observation dispersions and its nominal response variance is 2 phi^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels as K
from .errors import DomainError


class Kind(Enum):
    NORMAL_TYPE = "normal"
    POISSON_TYPE = "poisson"
    BINOMIAL_TYPE = "binomial"
    GAMMA_DISP = "gamma-dispersion"


class Link(Enum):
    IDENTITY = "identity"
    LOG = "log"
    LOGIT = "logit"


_ALLOWED_LINKS = {
    Kind.NORMAL_TYPE: (Link.IDENTITY, Link.LOG),
    Kind.POISSON_TYPE: (Link.LOG,),
    Kind.BINOMIAL_TYPE: (Link.LOGIT,),
    Kind.GAMMA_DISP: (Link.LOG,),
}

_KIND_CODE = {
    Kind.NORMAL_TYPE: K.FAM_NORMAL,
    Kind.POISSON_TYPE: K.FAM_POISSON,
    Kind.BINOMIAL_TYPE: K.FAM_BINOMIAL,
    Kind.GAMMA_DISP: K.FAM_GAMMA,
}

_LINK_CODE = {
    Link.IDENTITY: K.LINK_IDENTITY,
    Link.LOG: K.LINK_LOG,
    Link.LOGIT: K.LINK_LOGIT,
}


@dataclass(frozen=True)
class Family:
    """A mean-variance relationship Var(Y) = phi V(mu) plus a link."""

    kind: Kind
    link: Link
    index: int = field(default=1)

    def __post_init__(self):
        if self.link not in _ALLOWED_LINKS[self.kind]:
            raise DomainError(f"link {self.link.value!r} not supported for {self.kind.value!r}")
        if self.kind is Kind.BINOMIAL_TYPE:
            if int(self.index) != self.index or self.index < 1:
                raise DomainError("binomial index m must be a positive integer")
            object.__setattr__(self, "index", int(self.index))

    # -- constructors -------------------------------------------------

    @classmethod
    def normal_type(cls, link: Link = Link.IDENTITY) -> "Family":
        return cls(Kind.NORMAL_TYPE, link)

    @classmethod
    def poisson_type(cls) -> "Family":
        return cls(Kind.POISSON_TYPE, Link.LOG)

    @classmethod
    def binomial_type(cls, m: int) -> "Family":
        return cls(Kind.BINOMIAL_TYPE, Link.LOGIT, index=m)

    @classmethod
    def gamma_dispersion(cls) -> "Family":
        return cls(Kind.GAMMA_DISP, Link.LOG)

    # -- kernel codes --------------------------------------------------

    @property
    def kind_code(self) -> int:
        return _KIND_CODE[self.kind]

    @property
    def link_code(self) -> int:
        return _LINK_CODE[self.link]

    @property
    def m(self) -> float:
        return float(self.index)

    # -- variance function ---------------------------------------------

    def variance(self, mu):
        mu = np.asarray(mu, dtype=np.float64)
        if self.kind is Kind.NORMAL_TYPE:
            return np.ones_like(mu)
        if self.kind is Kind.POISSON_TYPE:
            return mu
        if self.kind is Kind.BINOMIAL_TYPE:
            return mu * (1.0 - mu / self.m)
        return mu * mu

    def variance_deriv(self, mu):
        """dV/dmu, used by the arc-length distances."""
        mu = np.asarray(mu, dtype=np.float64)
        if self.kind is Kind.NORMAL_TYPE:
            return np.zeros_like(mu)
        if self.kind is Kind.POISSON_TYPE:
            return np.ones_like(mu)
        if self.kind is Kind.BINOMIAL_TYPE:
            return 1.0 - 2.0 * mu / self.m
        return 2.0 * mu

    # -- links -----------------------------------------------------------

    def link_eval(self, mu):
        mu = np.asarray(mu, dtype=np.float64)
        if self.link is Link.IDENTITY:
            return mu
        if self.link is Link.LOG:
            return np.log(mu)
        return np.log(mu / (self.m - mu))

    def inverse_link(self, eta):
        eta = np.asarray(eta, dtype=np.float64)
        if self.link is Link.IDENTITY:
            return eta
        if self.link is Link.LOG:
            return np.exp(eta)
        out = np.empty_like(eta)
        pos = eta >= 0.0
        out[pos] = self.m / (1.0 + np.exp(-eta[pos]))
        e = np.exp(eta[~pos])
        out[~pos] = self.m * e / (1.0 + e)
        return out

    # -- domains -----------------------------------------------------------

    def check_response(self, y):
        y = np.asarray(y, dtype=np.float64)
        if not np.all(np.isfinite(y)):
            raise DomainError("response contains non-finite values")
        if self.kind is Kind.POISSON_TYPE and np.any(y < 0.0):
            raise DomainError("Poisson-type responses must be >= 0")
        if self.kind is Kind.BINOMIAL_TYPE and (np.any(y < 0.0) or np.any(y > self.m)):
            raise DomainError(f"Binomial-type responses must lie in [0, {self.index}]")
        if self.kind is Kind.GAMMA_DISP and np.any(y <= 0.0):
            raise DomainError("Gamma dispersion responses must be > 0")
        return y

    def check_mean(self, mu):
        mu = np.asarray(mu, dtype=np.float64)
        if self.kind is Kind.NORMAL_TYPE:
            ok = np.all(np.isfinite(mu))
        elif self.kind is Kind.BINOMIAL_TYPE:
            ok = bool(np.all(mu > 0.0) and np.all(mu < self.m))
        else:
            ok = bool(np.all(mu > 0.0))
        if not ok or not np.all(np.isfinite(mu)):
            raise DomainError(f"mean values outside the {self.kind.value} domain")
        return mu

    def variance_at_response(self, y):
        """V(y) with the continuity guard used by the quasi-likelihood.

        V vanishes at the edge of the Poisson/Binomial observation domains,
        so edge responses are nudged 1/6 into the interior before V is
        evaluated.
        """
        y = np.asarray(y, dtype=np.float64)
        if self.kind is Kind.POISSON_TYPE:
            return self.variance(np.where(y == 0.0, 1.0 / 6.0, y))
        if self.kind is Kind.BINOMIAL_TYPE:
            return self.variance(np.clip(y, 1.0 / 6.0, self.m - 1.0 / 6.0))
        return self.variance(y)
