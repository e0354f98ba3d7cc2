"""In-memory dataset and term-label resolution.

A term label is either "1" (intercept), the name of a factor column, or a
concatenation of factor names whose column is the elementwise product of
the named columns (so "CN" is the C x N interaction).  Interaction columns
are generated lazily and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnknownTerm
from .glm import DesignMatrix


def _valid_label(name: str) -> bool:
    return name.isalnum() and name != ""


@dataclass
class Dataset:
    """A response vector plus named numeric factor columns."""

    response: np.ndarray
    factors: dict[str, np.ndarray]
    binomial_index: int | None = None
    _cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        y = np.asarray(self.response, dtype=np.float64)
        if y.ndim != 1 or y.size == 0:
            raise DomainError("response must be a non-empty vector")
        if not np.all(np.isfinite(y)):
            raise DomainError("response contains missing or non-finite values")
        self.response = y
        cols = {}
        for name, col in self.factors.items():
            if not _valid_label(name):
                raise DomainError(f"factor name {name!r} is not a valid term label")
            c = np.asarray(col, dtype=np.float64)
            if c.shape != y.shape:
                raise DomainError(f"factor {name!r} length differs from the response")
            if not np.all(np.isfinite(c)):
                raise DomainError(f"factor {name!r} contains missing or non-finite values")
            cols[name] = c
        self.factors = cols

    @property
    def n(self) -> int:
        return self.response.shape[0]

    def decompose(self, label: str) -> tuple[str, ...] | None:
        """Split an interaction label into factor names, or None."""
        names = list(self.factors)
        memo: dict[str, tuple[str, ...] | None] = {"": ()}

        def split(rest: str):
            if rest in memo:
                return memo[rest]
            memo[rest] = None
            for name in names:
                if rest.startswith(name):
                    tail = split(rest[len(name) :])
                    if tail is not None:
                        memo[rest] = (name, *tail)
                        break
            return memo[rest]

        parts = split(label)
        if parts is None or len(parts) < 2:
            return None
        return parts

    def column(self, label: str) -> np.ndarray:
        """Resolve one term label to a column."""
        if label == "1":
            return np.ones(self.n)
        if label in self.factors:
            return self.factors[label]
        if label in self._cache:
            return self._cache[label]
        parts = self.decompose(label)
        if parts is None:
            raise UnknownTerm(f"term {label!r} matches no factor column or product")
        col = np.ones(self.n)
        for part in parts:
            col = col * self.factors[part]
        self._cache[label] = col
        return col

    def design(self, terms) -> DesignMatrix:
        """Build a DesignMatrix for an ordered collection of term labels."""
        labels = tuple(terms)
        values = np.column_stack([self.column(t) for t in labels])
        return DesignMatrix(labels, values)
