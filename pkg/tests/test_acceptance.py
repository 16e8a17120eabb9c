"""Acceptance gate: one test per release criterion, at the stated tolerances.

Dataset-scale criteria run the real pipeline on the bundled PPI, Wikipedia,
and BlogCatalog graphs; numerical criteria validate the randomized range
finder against dense oracles.
"""

import time

import numpy as np
import pytest
import scipy.sparse as sp
from threadpoolctl import threadpool_limits

from qrembed.cli import RunConfig, embed_pipeline
from qrembed.diffusion import apply_filter, make_filter
from qrembed.evaluation import f1_scores, load_labels, logistic_loss_grad, run_protocol
from qrembed.graph import SparseMatrix, transition_matrix
from qrembed.oracle import approx_error, dense_tsvd, theorem1_bound
from qrembed.proximity import ProximityConfig, build_m, context_weights
from qrembed.rangefinder import RbqrParams, rbqr_basis

from conftest import random_transition

SEED = 7


def _embed(edges, **kw):
    """Single-threaded pipeline run; returns (embedding, basis, seconds)."""
    cfg = RunConfig(input=str(edges), **kw)
    t0 = time.perf_counter()
    with threadpool_limits(limits=1):
        r, c, _ = embed_pipeline(cfg)
    return r, c, time.perf_counter() - t0


def spectrum_matrix(n, sigma, seed):
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((n, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (u * sigma) @ v.T


@pytest.fixture(scope="module")
def ppi(data_dir):
    refine, basis, secs = _embed(data_dir / "ppi.edges.gz")
    raw, _, _ = _embed(data_dir / "ppi.edges.gz", filter_kind="none")
    labels = load_labels(data_dir / "ppi.labels.gz", n=3890)
    return {"refine": refine, "raw": raw, "basis": basis,
            "labels": labels, "embed_seconds": secs}


@pytest.fixture(scope="module")
def wiki(data_dir):
    refine, _, _ = _embed(data_dir / "wikipedia.edges.gz")
    labels = load_labels(data_dir / "wikipedia.labels.gz", n=4777)
    return {"refine": refine, "labels": labels}


@pytest.fixture(scope="module")
def blog(data_dir):
    labels = load_labels(data_dir / "blogcatalog.labels.gz", n=10312)
    embs, default_secs = {}, None
    for b in (8, 16, 32, 64):
        r, _, secs = _embed(data_dir / "blogcatalog.edges.gz", block=b)
        embs[b] = r
        if b == 16:
            default_secs = secs
    return {"embs": embs, "labels": labels, "embed_seconds": default_secs}


def test_criterion_01_ppi_classification(ppi):
    t0 = time.perf_counter()
    report = run_protocol(ppi["refine"], ppi["labels"], ratios=[0.5],
                          repeats=10, seed=SEED, normalize=True)
    micro = 100.0 * report.mean_micro(0.5)
    total = ppi["embed_seconds"] + (time.perf_counter() - t0)
    assert abs(micro - 24.30) <= 1.5, f"PPI@50% micro-F1 {micro:.2f} not in 24.30 +/- 1.5"
    assert total < 120.0, f"full PPI experiment took {total:.1f}s (budget 120s)"


def test_criterion_02_wikipedia_classification(wiki):
    report = run_protocol(wiki["refine"], wiki["labels"], ratios=[0.1, 0.9],
                          repeats=10, seed=SEED, normalize=True)
    at10 = 100.0 * report.mean_micro(0.1)
    at90 = 100.0 * report.mean_micro(0.9)
    assert abs(at10 - 51.17) <= 2.0, f"Wikipedia@10% micro-F1 {at10:.2f} not in 51.17 +/- 2.0"
    assert abs(at90 - 58.84) <= 2.0, f"Wikipedia@90% micro-F1 {at90:.2f} not in 58.84 +/- 2.0"


def test_criterion_03_filter_ablation(ppi):
    filtered = run_protocol(ppi["refine"], ppi["labels"], [0.5], 10,
                            seed=SEED, normalize=True).mean_micro(0.5)
    unfiltered = run_protocol(ppi["raw"], ppi["labels"], [0.5], 10,
                              seed=SEED, normalize=True).mean_micro(0.5)
    assert filtered > unfiltered, (
        f"diffusion filter did not help: {100 * filtered:.2f} vs {100 * unfiltered:.2f}")


def test_criterion_04_embedding_runtime(ppi, blog):
    assert ppi["embed_seconds"] <= 2.0, f"PPI embed took {ppi['embed_seconds']:.2f}s (budget 2s)"
    assert blog["embed_seconds"] <= 10.0, (
        f"BlogCatalog embed took {blog['embed_seconds']:.2f}s (budget 10s)")


def test_criterion_05_expected_error_bound_monte_carlo():
    t0 = time.perf_counter()
    n, k, p = 300, 16, 8
    sigma = 0.8 ** np.arange(1, n + 1)
    m = spectrum_matrix(n, sigma, seed=0)
    rng = np.random.default_rng(123)
    errs = []
    for _ in range(100):
        omega = rng.standard_normal((n, k + p)) / np.sqrt(k)
        basis, _ = np.linalg.qr(m @ omega)
        errs.append(approx_error(m, basis))
    bound = theorem1_bound(sigma, k, p)
    elapsed = time.perf_counter() - t0
    assert np.mean(errs) <= bound, f"mean error {np.mean(errs):.4f} exceeds bound {bound:.4f}"
    assert elapsed < 30.0, f"Monte-Carlo run took {elapsed:.1f}s (budget 30s)"


def test_criterion_06_near_optimality_vs_tsvd():
    n, k = 200, 16
    sigma = np.arange(1, n + 1) ** -0.5  # power-law decay
    for trial in range(20):
        m = spectrum_matrix(n, sigma, seed=trial)
        sm = SparseMatrix.from_scipy(sp.csr_matrix(m))
        c, _ = rbqr_basis(sm, RbqrParams(k=k, b=8, q=3, seed=100 + trial))
        err = approx_error(m, c)
        opt = approx_error(m, dense_tsvd(m, k).u)
        assert err <= 1.5 * opt, f"trial {trial}: {err:.4f} > 1.5 x {opt:.4f}"


def test_criterion_07_power_iteration_monotonicity():
    n, k = 150, 16
    sigma = 1.0 / np.arange(1, n + 1)  # slow decay
    m = spectrum_matrix(n, sigma, seed=5)
    sm = SparseMatrix.from_scipy(sp.csr_matrix(m))
    medians = {}
    for q in (1, 2, 3):
        errs = [approx_error(m, rbqr_basis(sm, RbqrParams(k=k, b=k, q=q, seed=s))[0])
                for s in range(10)]
        medians[q] = float(np.median(errs))
    assert medians[3] <= medians[2] <= medians[1], f"medians not monotone: {medians}"


def test_criterion_08_block_size_insensitivity(blog):
    micros = {}
    for b, emb in blog["embs"].items():
        report = run_protocol(emb, blog["labels"], [0.5], 10,
                              seed=SEED, normalize=True)
        micros[b] = 100.0 * report.mean_micro(0.5)
    spread = max(micros.values()) - min(micros.values())
    assert spread <= 1.0, f"micro-F1 varies by {spread:.2f} points across blocks: {micros}"


def test_criterion_09_invariant_suite(ppi, data_dir):
    # orthonormal basis on a real run
    c = ppi["basis"]
    assert np.max(np.abs(c.T @ c - np.eye(c.shape[1]))) <= 1e-8

    # row-stochastic transition matrices
    from qrembed.graph import load_edge_list
    g = load_edge_list(data_dir / "ppi.edges.gz")
    rows = np.asarray(transition_matrix(g).to_scipy().sum(axis=1)).ravel()
    assert np.max(np.abs(rows - 1.0)) <= 1e-12

    # identity filter is exact
    p = random_transition(30, 0.2, seed=0)
    r = np.random.default_rng(0).standard_normal((30, 6))
    out = apply_filter(p, r, make_filter("custom", K=2, theta=[1.0, 0.0, 0.0]))
    assert np.max(np.abs(out - r)) <= 1e-12

    # dense-oracle equivalence of the proximity build and the filter, n <= 50
    for seed in range(5):
        n = 20 + 6 * seed
        pm = random_transition(n, 0.2, seed=seed)
        dense = pm.to_scipy().toarray()
        phi = dense.sum(axis=0) / dense.sum()
        expected = np.zeros_like(dense)
        nz = dense > 0
        expected[nz] = np.log(dense[nz] / np.broadcast_to(phi, dense.shape)[nz])
        expected = np.maximum(expected, 0.0)
        built = build_m(pm, context_weights(pm), ProximityConfig()).to_scipy().toarray()
        assert np.max(np.abs(built - expected)) <= 1e-12

        spec = make_filter("heat", K=3, t=0.5)
        rr = np.random.default_rng(seed).standard_normal((n, 4))
        dense_out = sum(th * np.linalg.matrix_power(dense, j) @ rr
                        for j, th in enumerate(spec.theta))
        assert np.max(np.abs(apply_filter(pm, rr, spec) - dense_out)) <= 1e-10

    # end-to-end determinism, fixed seed, single thread
    again, _, _ = _embed(data_dir / "ppi.edges.gz")
    assert np.array_equal(again, ppi["refine"])


def test_criterion_10_classifier_sanity():
    # finite-difference gradient check
    rng = np.random.default_rng(2)
    x = rng.standard_normal((20, 4))
    y = (rng.random(20) < 0.5).astype(float)
    w = rng.standard_normal(5) * 0.5
    _, grad = logistic_loss_grad(w, x, y, reg=0.7)
    eps = 1e-6
    fd = np.empty_like(w)
    for i in range(len(w)):
        wp, wm = w.copy(), w.copy()
        wp[i] += eps
        wm[i] -= eps
        fd[i] = (logistic_loss_grad(wp, x, y, 0.7)[0]
                 - logistic_loss_grad(wm, x, y, 0.7)[0]) / (2 * eps)
    assert np.max(np.abs(grad - fd)) <= 1e-5

    # hand-computed confusion-matrix cases
    preds = [np.array([0]), np.array([0])]
    truth = [np.array([0]), np.array([1])]
    micro, macro = f1_scores(preds, truth, 2)
    assert micro == pytest.approx(0.5)
    assert macro == pytest.approx(1.0 / 3.0)
    assert f1_scores(truth, truth, 2) == (1.0, 1.0)
    assert f1_scores([np.array([1]), np.array([0])], truth, 2) == (0.0, 0.0)
