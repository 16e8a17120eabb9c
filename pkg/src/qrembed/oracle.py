"""Dense brute-force references for validating the randomized path.

Test-grade code: everything here is O(n^3) and meant for matrices up to a
couple of thousand rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, NumericError


@dataclass
class SvdTriple:
    u: np.ndarray       # n x k, orthonormal columns
    sigma: np.ndarray   # k singular values, descending
    v: np.ndarray       # n x k, orthonormal columns


def dense_tsvd(m: np.ndarray, k: int) -> SvdTriple:
    """Top-k singular triple of a dense matrix via full SVD."""
    m = np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise NumericError("input matrix contains non-finite values")
    if k < 1 or k > min(m.shape):
        raise DomainError(f"rank k={k} outside [1, {min(m.shape)}]")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return SvdTriple(u=u[:, :k], sigma=s[:k], v=vt[:k].T)


def approx_error(m, c: np.ndarray) -> float:
    """Frobenius norm of M - C (C^T M), without forming C C^T.

    Dense inputs use the explicit residual; sparse inputs use
    ||M||_F^2 - ||C^T M||_F^2 (valid because C is orthonormal, which is
    checked to 1e-6).
    """
    gram_err = np.max(np.abs(c.T @ c - np.eye(c.shape[1])))
    if gram_err > 1e-6:
        raise DomainError(f"basis is not orthonormal (||C'C - I||_max = {gram_err:.2e})")
    if sp.issparse(m):
        b = (m.T @ c).T  # C^T M, dense k x n
        err_sq = sp.linalg.norm(m) ** 2 - np.linalg.norm(b) ** 2
        return float(np.sqrt(max(err_sq, 0.0)))
    m = np.asarray(m, dtype=np.float64)
    resid = m - c @ (c.T @ m)
    return float(np.linalg.norm(resid))


def theorem1_bound(sigma, k: int, p: int) -> float:
    """Expected-error bound (1 + k/(p-1))^(1/2) * sqrt(sum_{j>k} sigma_j^2).

    Requires k >= 2 and p >= 2 (hypotheses of the guarantee); sigma is the
    full descending singular value list.
    """
    if k < 2:
        raise DomainError(f"target rank must be >= 2, got {k}")
    if p < 2:
        raise DomainError(f"oversampling must be >= 2, got {p}")
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma < 0) or np.any(np.diff(sigma) > 1e-12):
        raise DomainError("sigma must be non-negative and descending")
    tail = float(np.sum(sigma[k:] ** 2))
    return float(np.sqrt(1.0 + k / (p - 1.0)) * np.sqrt(tail))
