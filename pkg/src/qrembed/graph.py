"""Edge-list parsing, CSR graph storage, and the random-walk transition matrix.

The on-disk format is whitespace-separated ``u v [w]`` lines with 0-based
integer node ids; lines starting with ``#`` or ``%`` are comments.  Files may
be gzip-compressed (detected by the ``.gz`` suffix or gzip magic bytes).
Graphs are undirected: every input arc is stored in both directions and
duplicate (u, v) pairs have their weights summed.
"""

from __future__ import annotations

import gzip
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, NumericError, ParseError

COMMENT_PREFIXES = ("#", "%")


@dataclass
class Graph:
    """Undirected weighted graph in CSR form.

    ``row_ptr``/``col_idx``/``weight`` store each undirected edge as two
    directed arcs (self-loops once).  ``degree[i]`` is the weighted degree,
    i.e. the sum of row i of the adjacency matrix.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    weight: np.ndarray
    degree: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.degree is None:
            self.degree = np.asarray(self.adjacency().sum(axis=1)).ravel()

    @property
    def n_arcs(self) -> int:
        return int(self.row_ptr[-1])

    @property
    def n_edges(self) -> int:
        """Number of undirected edges (self-loops count once)."""
        loops = int(np.sum(self.col_idx == np.repeat(np.arange(self.n), np.diff(self.row_ptr))))
        return (self.n_arcs - loops) // 2 + loops

    def adjacency(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.weight, self.col_idx, self.row_ptr), shape=(self.n, self.n)
        )

    def validate(self):
        if np.any(np.diff(self.row_ptr) < 0) or self.row_ptr[-1] != len(self.col_idx):
            raise DomainError("invalid CSR row pointer")
        a = self.adjacency()
        if (a != a.T).nnz != 0:
            raise DomainError("adjacency is not symmetric")


@dataclass
class SparseMatrix:
    """General CSR matrix (used for the transition matrix and the log-ratio matrix)."""

    n_rows: int
    n_cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    @classmethod
    def from_scipy(cls, m: sp.spmatrix) -> "SparseMatrix":
        m = sp.csr_matrix(m)
        m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data)

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.col_idx, self.row_ptr), shape=(self.n_rows, self.n_cols)
        )

    @property
    def nnz(self) -> int:
        return len(self.values)

    def validate(self):
        if np.any(np.diff(self.row_ptr) < 0) or self.row_ptr[-1] != self.nnz:
            raise DomainError("invalid CSR row pointer")
        if not np.all(np.isfinite(self.values)):
            raise NumericError("sparse matrix contains non-finite values")


def open_maybe_gzip(source) -> io.TextIOBase:
    """Open a path or binary stream as text, transparently decompressing gzip."""
    if hasattr(source, "read"):
        raw = source.read()
        if isinstance(raw, str):
            return io.StringIO(raw)
        if raw[:2] == b"\x1f\x8b":
            raw = gzip.decompress(raw)
        return io.StringIO(raw.decode("utf-8"))
    path = str(source)
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def load_edge_list(source, weighted: bool = True, isolated: str = "selfloop") -> Graph:
    """Parse an edge list into a symmetrized, deduplicated CSR graph.

    Parameters
    ----------
    source : path or binary stream
        Lines of ``u v`` or ``u v w``; '#'/'%' comment lines skipped.
    weighted : bool
        If False, a third column is ignored and all weights are 1.
    isolated : {"selfloop", "drop"}
        Zero-degree handling: add a unit self-loop (default, keeps every
        node embeddable) or leave the node with an empty row ("drop" only
        makes sense for callers that never normalize by degree).

    Raises
    ------
    ParseError
        Malformed line (with its line number).
    DomainError
        Negative weight, or empty input.
    """
    us, vs, ws = [], [], []
    max_id = -1
    with open_maybe_gzip(source) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line[0] in COMMENT_PREFIXES:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"expected 'u v [w]', got {line!r}", line_no)
            try:
                u = int(parts[0])
                v = int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer node id in {line!r}", line_no) from None
            if u < 0 or v < 0:
                raise ParseError(f"negative node id in {line!r}", line_no)
            w = 1.0
            if weighted and len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise ParseError(f"non-numeric weight in {line!r}", line_no) from None
                if not np.isfinite(w) or w <= 0:
                    raise DomainError(f"line {line_no}: weight must be positive and finite")
            us.append(u)
            vs.append(v)
            ws.append(w)
            if u > max_id:
                max_id = u
            if v > max_id:
                max_id = v
    if max_id < 0:
        raise DomainError("empty edge list")

    n = max_id + 1
    u = np.asarray(us, dtype=np.int64)
    v = np.asarray(vs, dtype=np.int64)
    w = np.asarray(ws, dtype=np.float64)
    # symmetrize: store (u,v) and (v,u); self-loops once
    off = u != v
    rows = np.concatenate([u, v[off]])
    cols = np.concatenate([v, u[off]])
    vals = np.concatenate([w, w[off]])
    a = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()  # sums duplicates
    a.sort_indices()

    if isolated == "selfloop":
        deg = np.asarray(a.sum(axis=1)).ravel()
        lonely = np.flatnonzero(deg == 0)
        if len(lonely):
            a = a + sp.csr_matrix(
                (np.ones(len(lonely)), (lonely, lonely)), shape=(n, n)
            )
            a.sort_indices()
    elif isolated != "drop":
        raise DomainError(f"unknown isolated-node policy {isolated!r}")

    return Graph(n=n, row_ptr=a.indptr, col_idx=a.indices, weight=a.data)


def transition_matrix(g: Graph) -> SparseMatrix:
    """Row-normalize the adjacency: P[i, j] = weight(i, j) / degree[i].

    Raises :class:`DomainError` when any node has zero degree (apply the
    isolated-node policy at load time first).
    """
    if np.any(g.degree <= 0):
        bad = int(np.flatnonzero(g.degree <= 0)[0])
        raise DomainError(f"node {bad} has zero degree; cannot normalize")
    inv_deg = 1.0 / g.degree
    scale = np.repeat(inv_deg, np.diff(g.row_ptr))
    return SparseMatrix(
        n_rows=g.n,
        n_cols=g.n,
        row_ptr=g.row_ptr.copy(),
        col_idx=g.col_idx.copy(),
        values=g.weight * scale,
    )


def write_edge_list(g: Graph, path):
    """Serialize a graph back to edge-list text (each undirected edge once)."""
    a = g.adjacency().tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        for i, j, w in zip(a.row, a.col, a.data):
            if i <= j:
                fh.write(f"{i} {j} {w:.17g}\n")
