"""Blocked randomized QR range finder with power iterations.

The embedding of an n x n sparse matrix M is built one block at a time:
draw a Gaussian block Omega (n x b), sharpen it with q sparse products
(Y = M^q Omega), orthonormalize Y against all previously accepted blocks,
and project (R_i^T = C_i^T M).  The concatenated C is an orthonormal basis
for an approximate range of M and R = [R_1 ... ] is the n x k embedding.
The residual M - R C^T is never formed, so memory stays O(nnz + n*k).
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBlockError, DomainError, NumericError
from .graph import SparseMatrix


@dataclass
class RbqrParams:
    k: int = 128
    b: int = 16
    q: int = 3
    seed: int = 0
    reorth_passes: int = 2
    max_redraws: int = 3

    def validate(self, n: int = None):
        if self.b < 1 or self.b > self.k:
            raise DomainError(f"block size must satisfy 1 <= b <= k, got b={self.b} k={self.k}")
        if self.q < 1:
            raise DomainError(f"power iteration count must be >= 1, got {self.q}")
        if self.reorth_passes not in (1, 2):
            raise DomainError("reorth_passes must be 1 or 2")
        if n is not None and self.k > n:
            raise DomainError(f"target rank k={self.k} exceeds matrix size n={n}")


class StageTimer:
    """Accumulates wall-clock seconds per pipeline stage (for the bench command)."""

    def __init__(self):
        self.seconds = {}

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[name] = self.seconds.get(name, 0.0) + time.perf_counter() - t0

    @property
    def total(self):
        return sum(self.seconds.values())


_NULL_TIMER = StageTimer()


def gaussian_block(n: int, b: int, rng: np.random.Generator) -> np.ndarray:
    """n x b block of i.i.d. standard normal draws from the given stream."""
    if n < 1 or b < 1:
        raise DomainError(f"block dimensions must be positive, got {n}x{b}")
    return rng.standard_normal((n, b))


def power_product(m: SparseMatrix, omega: np.ndarray, q: int) -> np.ndarray:
    """Return M^q @ Omega via q successive sparse-dense products."""
    if m.n_cols != omega.shape[0]:
        raise DomainError(
            f"dimension mismatch: matrix is {m.n_rows}x{m.n_cols}, block has {omega.shape[0]} rows"
        )
    if q < 1:
        raise DomainError(f"power iteration count must be >= 1, got {q}")
    a = m.to_scipy()
    y = omega
    for _ in range(q):
        y = a @ y
    if not np.all(np.isfinite(y)):
        raise NumericError("power iteration overflowed to non-finite values")
    return y


def block_orthonormalize(y: np.ndarray, prev_blocks, passes: int = 2,
                         timer: StageTimer = None) -> np.ndarray:
    """Orthonormalize a block against previously accepted blocks.

    QR of y first, then `passes` rounds of classical Gram-Schmidt projection
    against the concatenated previous basis, then a final QR.  A column
    whose projection collapses (relative R-diagonal below ~1e-10) signals
    rank deficiency and raises :class:`DegenerateBlockError`; the caller is
    expected to re-draw the random block.
    """
    timer = timer or StageTimer()
    with timer.stage("qr"):
        c, r = np.linalg.qr(y)
    _check_full_rank(r)
    if prev_blocks:
        basis = np.hstack(prev_blocks) if len(prev_blocks) > 1 else prev_blocks[0]
        with timer.stage("dense_product"):
            for _ in range(passes):
                c = c - basis @ (basis.T @ c)
        with timer.stage("qr"):
            c, r = np.linalg.qr(c)
        _check_full_rank(r)
    return c


def _check_full_rank(r: np.ndarray, rel_tol: float = 1e-10):
    d = np.abs(np.diag(r))
    if d.size == 0:
        return
    if np.min(d) <= rel_tol * max(np.max(d), 1e-300):
        raise DegenerateBlockError(
            f"block lost rank during orthogonalization (min |R_ii| = {np.min(d):.3e})"
        )


def rbqr_basis(m: SparseMatrix, params: RbqrParams, timer: StageTimer = None):
    """Run the full blocked range finder; return (C, R).

    C is n x k with orthonormal columns, R is the n x k embedding with
    R_i^T = C_i^T M per block.  Deterministic for a fixed seed.
    """
    timer = timer or StageTimer()
    params.validate(n=m.n_rows)
    if m.n_rows != m.n_cols:
        raise DomainError(f"matrix must be square, got {m.n_rows}x{m.n_cols}")
    a = m.to_scipy()
    at = a.T.tocsr()
    rng = np.random.default_rng(params.seed)

    blocks, r_blocks = [], []
    remaining = params.k
    while remaining > 0:
        width = min(params.b, remaining)
        for attempt in range(params.max_redraws + 1):
            with timer.stage("rng"):
                omega = gaussian_block(m.n_rows, width, rng)
            with timer.stage("sparse_product"):
                y = power_product(m, omega, params.q)
            try:
                c_i = block_orthonormalize(y, blocks, params.reorth_passes, timer=timer)
                break
            except DegenerateBlockError:
                if attempt == params.max_redraws:
                    raise
        with timer.stage("sparse_product"):
            r_i = at @ c_i  # equals (C_i^T M)^T
        blocks.append(c_i)
        r_blocks.append(r_i)
        remaining -= width

    c = np.hstack(blocks)
    r = np.hstack(r_blocks)
    return c, r


def rbqr_embed(m: SparseMatrix, params: RbqrParams, timer: StageTimer = None) -> np.ndarray:
    """Return the n x k node embedding R (see :func:`rbqr_basis`)."""
    _, r = rbqr_basis(m, params, timer=timer)
    return r
