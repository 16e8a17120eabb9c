"""Sparse log-ratio proximity matrix.

Each stored transition probability p_ij is turned into
``ln(p_ij / (lambda * phi_j))`` where phi_j is the empirical context weight
of node j (its column mass in the transition matrix, normalized over all
stored entries) and lambda is the negative-sample ratio.  Non-positive
entries are truncated to structural zeros by default, which keeps the
matrix sparse and non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .graph import SparseMatrix


@dataclass
class ContextWeights:
    """Per-node context distribution phi (sums to 1) and the raw total mass."""

    phi: np.ndarray
    total_mass: float


@dataclass
class ProximityConfig:
    lam: float = 1.0
    truncate_nonpositive: bool = True

    def validate(self):
        if not np.isfinite(self.lam) or self.lam <= 0:
            raise DomainError(f"lambda must be positive and finite, got {self.lam}")


def context_weights(p: SparseMatrix) -> ContextWeights:
    """Column mass of each node divided by the total stored mass.

    For a row-stochastic transition matrix the total mass equals the number
    of rows, so phi_j = colsum_j / n.
    """
    m = p.to_scipy()
    col = np.asarray(m.sum(axis=0)).ravel()
    total = float(col.sum())
    if total <= 0:
        raise DomainError("transition matrix has no positive mass")
    return ContextWeights(phi=col / total, total_mass=total)


def build_m(p: SparseMatrix, cw: ContextWeights, cfg: ProximityConfig = None) -> SparseMatrix:
    """Evaluate the log ratio ln(p_ij / (lambda * phi_j)) on p's pattern.

    With truncation enabled (default), entries <= 0 are dropped from
    storage; the result's pattern is a subset of p's pattern.
    """
    cfg = cfg or ProximityConfig()
    cfg.validate()
    m = p.to_scipy().copy()
    phi_per_entry = cw.phi[m.indices]
    if np.any(phi_per_entry <= 0):
        raise DomainError("phi is zero for a stored column; context weights do not match p")
    data = np.log(m.data) - np.log(cfg.lam * phi_per_entry)
    if cfg.truncate_nonpositive:
        data = np.maximum(data, 0.0)
    m.data = data
    if cfg.truncate_nonpositive:
        m.eliminate_zeros()
    m.sort_indices()
    return SparseMatrix.from_scipy(m)


def dump_matrix_market(m: SparseMatrix, path):
    """Debug dump in MatrixMarket coordinate text format."""
    sp_m = m.to_scipy()
    from scipy.io import mmwrite

    mmwrite(str(path), sp_m)
