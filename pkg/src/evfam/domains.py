"""Open parameter domains for mean and canonical spaces.

A domain is one of three kinds:

* ``box``: a product of open intervals, bounds may be infinite;
* ``half-space-product``: same representation as a box, but tagged to record
  that it arose as a product of one-sided constraints (e.g. the canonical
  domain ``(-inf, c) x R^d`` of a family that is steep in one coordinate);
* ``custom-predicate``: membership decided by a callable, for domains that
  are not axis-aligned (e.g. means coupled through a quadratic form).

Membership checks are deterministic and strict: all stated domains are open,
so boundary points are outside.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["DomainDescriptor", "box_domain", "positive_orthant", "full_space"]


@dataclass(frozen=True)
class DomainDescriptor:
    """An open subset of R^d used as a mean or canonical parameter space.

    For ``box`` and ``half-space-product`` kinds, ``lower`` and ``upper``
    are arrays of shape (dim,) with ``lower < upper`` componentwise
    (infinities allowed).  For ``custom-predicate``, membership is
    delegated to ``predicate`` and the bounds are advisory only (they may
    describe a bounding box, or be fully infinite).
    """

    kind: str
    dim: int
    lower: np.ndarray = field(default=None)
    upper: np.ndarray = field(default=None)
    predicate: Callable[[np.ndarray], bool] | None = None
    convex: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("box", "half-space-product", "custom-predicate"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        lower = np.full(self.dim, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        upper = np.full(self.dim, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if lower.shape != (self.dim,) or upper.shape != (self.dim,):
            raise ValueError("domain bounds must have shape (dim,)")
        if not np.all(lower < upper):
            raise ValueError("domain requires lower < upper componentwise")
        if self.kind == "custom-predicate" and self.predicate is None:
            raise ValueError("custom-predicate domain needs a predicate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def contains(self, x: np.ndarray | float, margin: float = 0.0) -> bool:
        """Strict interior membership; ``margin`` shrinks the box on both sides."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise ValueError(f"point has shape {x.shape}, domain is {self.dim}-dimensional")
        if not np.all(np.isfinite(x)):
            return False
        inside_box = bool(np.all(x > self.lower + margin) and np.all(x < self.upper - margin))
        if self.kind == "custom-predicate":
            return inside_box and bool(self.predicate(x))
        return inside_box

    def shifted(self, delta: np.ndarray) -> "DomainDescriptor":
        """Translate a box-like domain by ``delta`` (used for re-anchoring)."""
        if self.kind == "custom-predicate":
            raise ValueError("cannot shift a custom-predicate domain")
        delta = np.atleast_1d(np.asarray(delta, dtype=float))
        return DomainDescriptor(self.kind, self.dim, self.lower + delta, self.upper + delta,
                                convex=self.convex)

    def is_box_like(self) -> bool:
        return self.kind in ("box", "half-space-product")

    def clipped_interior(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Finite per-axis ranges for grid construction, clipped to [lo, hi]."""
        lower = np.maximum(self.lower, lo)
        upper = np.minimum(self.upper, hi)
        return lower, upper


def box_domain(lower, upper, kind: str = "box", convex: bool = True) -> DomainDescriptor:
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    return DomainDescriptor(kind, lower.shape[0], lower, upper, convex=convex)


def positive_orthant(dim: int = 1) -> DomainDescriptor:
    return box_domain(np.zeros(dim), np.full(dim, np.inf))


def full_space(dim: int = 1) -> DomainDescriptor:
    return box_domain(np.full(dim, -np.inf), np.full(dim, np.inf))
