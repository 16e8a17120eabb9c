"""Spectral diffusion filter: R* = sum_{k'=0..K} theta_k' T^k' R.

T is the row-stochastic transition matrix, so the filter mixes K-hop
neighborhood averages into each node vector.  Powers of T are never
materialized; the sum is accumulated with exactly K sparse-dense products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .graph import SparseMatrix

KINDS = ("heat", "markov", "custom")


@dataclass
class FilterSpec:
    kind: str
    K: int
    theta: np.ndarray
    t: float = None  # heat kernel time parameter, heat kind only

    def validate(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown filter kind {self.kind!r}")
        if self.K < 0:
            raise DomainError("diffusion order K must be >= 0")
        theta = np.asarray(self.theta, dtype=np.float64)
        if theta.shape != (self.K + 1,) or not np.all(np.isfinite(theta)):
            raise DomainError(f"theta must be {self.K + 1} finite coefficients")


def make_filter(kind: str, K: int = 2, t: float = 0.5, theta=None) -> FilterSpec:
    """Build a diffusion spec.

    heat:   theta_k = exp(-t) * t^k / k!   (t > 0)
    markov: theta_k = 1 / (K + 1)
    custom: theta taken verbatim (length K + 1)
    """
    if K < 0:
        raise DomainError("diffusion order K must be >= 0")
    if kind == "heat":
        if t is None or t <= 0:
            raise DomainError(f"heat kernel needs t > 0, got {t}")
        coeff = np.array([math.exp(-t) * t**k / math.factorial(k) for k in range(K + 1)])
        spec = FilterSpec(kind="heat", K=K, theta=coeff, t=t)
    elif kind == "markov":
        spec = FilterSpec(kind="markov", K=K, theta=np.full(K + 1, 1.0 / (K + 1)))
    elif kind == "custom":
        if theta is None:
            raise DomainError("custom filter requires explicit theta")
        spec = FilterSpec(kind="custom", K=K, theta=np.asarray(theta, dtype=np.float64))
    else:
        raise DomainError(f"unknown filter kind {kind!r}")
    spec.validate()
    return spec


def renormalized(spec: FilterSpec) -> FilterSpec:
    """Scale theta to sum to 1 (optional; truncated heat kernels sum below 1)."""
    s = float(np.sum(spec.theta))
    if s == 0:
        raise DomainError("cannot renormalize a filter whose coefficients sum to zero")
    return FilterSpec(kind=spec.kind, K=spec.K, theta=spec.theta / s, t=spec.t)


def unit_rows(r: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm (zero rows are left untouched).

    Puts every node vector on the sphere before diffusion, so the filter
    mixes directions rather than magnitudes; without this, high-degree
    nodes dominate their neighborhoods' averages.
    """
    norms = np.linalg.norm(r, axis=1, keepdims=True)
    return r / np.maximum(norms, 1e-12)


def apply_filter(t_matrix: SparseMatrix, r: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Accumulate sum theta_k' T^k' R with K sparse-dense products."""
    spec.validate()
    if t_matrix.n_rows != t_matrix.n_cols or t_matrix.n_cols != r.shape[0]:
        raise DomainError(
            f"dimension mismatch: T is {t_matrix.n_rows}x{t_matrix.n_cols}, R has {r.shape[0]} rows"
        )
    a = t_matrix.to_scipy()
    out = spec.theta[0] * r
    z = r
    for k in range(1, spec.K + 1):
        z = a @ z
        out = out + spec.theta[k] * z
    return out
