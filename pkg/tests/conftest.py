import pathlib

import numpy as np
import pytest
import scipy.sparse as sp

from qrembed.graph import Graph, SparseMatrix, load_edge_list, transition_matrix

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def graph_from_edges(edges, n=None):
    """Build a Graph from a list of (u, v[, w]) tuples (undirected)."""
    lines = []
    for e in edges:
        lines.append(" ".join(str(x) for x in e))
    text = "\n".join(lines) + "\n"
    import io

    g = load_edge_list(io.BytesIO(text.encode()))
    if n is not None and g.n < n:
        # pad with isolated nodes (loader adds unit self-loops)
        text += f"{n - 1} {n - 1}\n"
        g = load_edge_list(io.BytesIO(text.encode()))
    return g


def random_transition(n, density, seed):
    """Random connected-ish row-stochastic matrix for oracle tests."""
    rng = np.random.default_rng(seed)
    a = sp.random(n, n, density=density, random_state=rng, data_rvs=rng.random)
    a = a + a.T + sp.eye(n)  # symmetric, positive diagonal -> no zero rows
    a = sp.csr_matrix(a)
    deg = np.asarray(a.sum(axis=1)).ravel()
    p = sp.diags(1.0 / deg) @ a
    return SparseMatrix.from_scipy(sp.csr_matrix(p))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def path_graph():
    return graph_from_edges([(0, 1), (1, 2)])


@pytest.fixture(scope="session")
def triangle_graph():
    return graph_from_edges([(0, 1), (1, 2), (0, 2)])


@pytest.fixture(scope="session")
def star_graph():
    """4 nodes, center 0."""
    return graph_from_edges([(0, 1), (0, 2), (0, 3)])


@pytest.fixture(scope="session")
def ppi_graph(data_dir):
    return load_edge_list(data_dir / "ppi.edges.gz")
