"""Multi-label node classification protocol.

Random train/test splits over labeled nodes, one-vs-rest L2-regularized
logistic regression (own loss/gradient, L-BFGS solver), top-l prediction
using each test node's true label count, and Micro/Macro-F1 over repeated
trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, NumericError
from .graph import open_maybe_gzip


@dataclass
class LabelSet:
    """Per-node label-id sets; nodes may carry zero labels (excluded from splits)."""

    n: int
    labels: list          # list of sorted int arrays, length n
    n_labels: int

    def labeled_nodes(self) -> np.ndarray:
        return np.flatnonzero([len(l) > 0 for l in self.labels])

    def indicator(self, nodes) -> np.ndarray:
        """Dense {0,1} matrix of shape (len(nodes), n_labels)."""
        y = np.zeros((len(nodes), self.n_labels))
        for row, node in enumerate(nodes):
            y[row, self.labels[node]] = 1.0
        return y


def load_labels(source, n: int = None) -> LabelSet:
    """Parse "node label1 [label2 ...]" lines; repeated node lines are unioned.

    If `n` is given, lines for node ids >= n are skipped with a warning
    (caller knows the graph size); otherwise n = max node id + 1.
    """
    import warnings

    per_node = {}
    max_node = -1
    max_label = -1
    with open_maybe_gzip(source) as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            node = int(parts[0])
            lbls = [int(x) for x in parts[1:]]
            if any(l < 0 for l in lbls) or node < 0:
                raise DomainError(f"line {line_no}: negative id")
            if n is not None and node >= n:
                warnings.warn(f"label line {line_no}: node {node} outside graph, skipped")
                continue
            per_node.setdefault(node, set()).update(lbls)
            max_node = max(max_node, node)
            if lbls:
                max_label = max(max_label, max(lbls))
    size = n if n is not None else max_node + 1
    if size <= 0:
        raise DomainError("empty label file")
    labels = [np.array(sorted(per_node.get(i, ())), dtype=np.int64) for i in range(size)]
    return LabelSet(n=size, labels=labels, n_labels=max_label + 1)


def split(labels: LabelSet, ratio: float, seed: int):
    """Uniform random partition of labeled nodes into (train, test) ids."""
    if not 0.0 < ratio < 1.0:
        raise DomainError(f"train ratio must be in (0, 1), got {ratio}")
    pool = labels.labeled_nodes()
    n_train = int(round(ratio * len(pool)))
    if n_train == 0 or n_train == len(pool):
        raise DomainError(f"ratio {ratio} leaves an empty train or test set")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(pool)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def logistic_loss_grad(w: np.ndarray, x: np.ndarray, y: np.ndarray, reg: float):
    """L2-regularized binary logistic loss and its gradient.

    w is (d+1,) with the intercept last (unpenalized); y in {0, 1}.
    Loss = sum_i log(1 + exp(-s_i * z_i)) + reg/2 * ||w[:-1]||^2 with
    z = x @ w[:-1] + w[-1] and s = 2y - 1.
    """
    z = x @ w[:-1] + w[-1]
    s = 2.0 * y - 1.0
    # log(1 + exp(-s z)), stable
    loss = np.sum(np.logaddexp(0.0, -s * z)) + 0.5 * reg * np.dot(w[:-1], w[:-1])
    # d/dz = -s * sigmoid(-s z) = sigmoid(z) - y
    p = 0.5 * (1.0 + np.tanh(0.5 * z))
    dz = p - y
    grad = np.empty_like(w)
    grad[:-1] = x.T @ dz + reg * w[:-1]
    grad[-1] = np.sum(dz)
    return loss, grad


def _joint_loss_grad(flat: np.ndarray, x: np.ndarray, y: np.ndarray, reg: float):
    # Separable across labels; optimizing jointly lets BLAS batch the work.
    d = x.shape[1]
    n_lab = y.shape[1]
    wb = flat.reshape(d + 1, n_lab)
    w, b = wb[:-1], wb[-1]
    z = x @ w + b
    s = 2.0 * y - 1.0
    loss = np.sum(np.logaddexp(0.0, -s * z)) + 0.5 * reg * np.sum(w * w)
    p = 0.5 * (1.0 + np.tanh(0.5 * z))
    dz = p - y
    grad = np.empty_like(wb)
    grad[:-1] = x.T @ dz + reg * w
    grad[-1] = np.sum(dz, axis=0)
    return loss, grad.ravel()


@dataclass
class OvrModel:
    """One binary logistic model per label; degenerate labels get constant scores."""

    weights: np.ndarray        # d x n_labels
    intercept: np.ndarray      # n_labels
    trained: np.ndarray        # bool mask; False -> constant-score label

    def scores(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.intercept


def ovr_train(x: np.ndarray, y: np.ndarray, reg: float = 1.0,
              gtol: float = 1e-6, max_iter: int = 1000) -> OvrModel:
    """Fit one-vs-rest logistic regression on an indicator matrix y.

    `reg` follows the inverse-strength convention: penalty is
    (1 / (2 * reg)) * ||W||^2, matching C in common implementations.
    Labels with no positive or no negative training example are not
    optimized; they get zero weights and an intercept of +/-20 so their
    constant score ranks sensibly.
    """
    if not np.all(np.isfinite(x)):
        raise NumericError("features contain non-finite values")
    n, d = x.shape
    n_lab = y.shape[1]
    pos = y.sum(axis=0)
    trainable = (pos > 0) & (pos < n)

    weights = np.zeros((d, n_lab))
    intercept = np.where(pos == 0, -20.0, 20.0)
    intercept[trainable] = 0.0

    if np.any(trainable):
        yt = y[:, trainable]
        x0 = np.zeros((d + 1) * yt.shape[1])
        res = minimize(
            _joint_loss_grad, x0, args=(x, yt, 1.0 / reg), jac=True,
            method="L-BFGS-B", options={"maxiter": max_iter, "gtol": gtol},
        )
        wb = res.x.reshape(d + 1, yt.shape[1])
        weights[:, trainable] = wb[:-1]
        intercept[trainable] = wb[-1]
    return OvrModel(weights=weights, intercept=intercept, trained=trainable)


def predict_topk(model: OvrModel, x: np.ndarray, true_label_counts) -> list:
    """Predict, per node, the l_i highest-scoring labels (ties -> lower id)."""
    scores = model.scores(x)
    preds = []
    for row, ell in zip(scores, true_label_counts):
        ell = int(ell)
        if ell <= 0:
            preds.append(np.empty(0, dtype=np.int64))
            continue
        # stable sort on -score keeps lower label ids first among ties
        order = np.argsort(-row, kind="stable")
        preds.append(np.sort(order[:ell]))
    return preds


def f1_scores(predictions, truth, n_labels: int):
    """(micro_f1, macro_f1) from aligned per-node prediction/truth label sets.

    Micro pools TP/FP/FN over all labels; macro averages per-label F1 over
    all n_labels labels, scoring 0 for labels with no truth and no
    predictions (split-independent denominator).
    """
    tp = np.zeros(n_labels)
    fp = np.zeros(n_labels)
    fn = np.zeros(n_labels)
    for pred, true in zip(predictions, truth):
        pred = np.asarray(pred, dtype=np.int64)
        true = np.asarray(true, dtype=np.int64)
        hit = np.intersect1d(pred, true, assume_unique=True)
        np.add.at(tp, hit, 1)
        np.add.at(fp, np.setdiff1d(pred, true, assume_unique=True), 1)
        np.add.at(fn, np.setdiff1d(true, pred, assume_unique=True), 1)
    micro_denom = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = 2 * tp.sum() / micro_denom if micro_denom > 0 else 0.0
    denom = 2 * tp + fp + fn
    per_label = np.divide(2 * tp, denom, out=np.zeros(n_labels), where=denom > 0)
    return float(micro), float(np.mean(per_label))


@dataclass
class EvalReport:
    """Per-(ratio, repeat) F1 cells plus mean/std aggregates per ratio."""

    cells: list = field(default_factory=list)   # (ratio, repeat, micro, macro)

    def add(self, ratio, repeat, micro, macro):
        self.cells.append((float(ratio), int(repeat), float(micro), float(macro)))

    def ratios(self):
        return sorted({c[0] for c in self.cells})

    def aggregate(self, ratio):
        mi = [c[2] for c in self.cells if c[0] == ratio]
        ma = [c[3] for c in self.cells if c[0] == ratio]
        return (
            float(np.mean(mi)), float(np.std(mi)),
            float(np.mean(ma)), float(np.std(ma)),
        )

    def mean_micro(self, ratio):
        return self.aggregate(ratio)[0]

    def to_tsv(self) -> str:
        lines = ["ratio\trepeat\tmicro_f1\tmacro_f1"]
        for ratio, rep, micro, macro in self.cells:
            lines.append(f"{ratio:g}\t{rep}\t{micro:.6f}\t{macro:.6f}")
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        lines = [f"{'ratio':>6}  {'micro-f1':>18}  {'macro-f1':>18}"]
        for ratio in self.ratios():
            mi, mi_s, ma, ma_s = self.aggregate(ratio)
            lines.append(
                f"{ratio:>6g}  {100 * mi:>8.2f} +/- {100 * mi_s:<5.2f}  "
                f"{100 * ma:>8.2f} +/- {100 * ma_s:<5.2f}"
            )
        return "\n".join(lines)


def run_protocol(embeddings: np.ndarray, labels: LabelSet, ratios, repeats: int,
                 seed: int, reg: float = 1.0, normalize: bool = False) -> EvalReport:
    """Full cross of ratios x repeats; split seeds derive from `seed` via a counter."""
    if embeddings.shape[0] != labels.n:
        raise DomainError(
            f"embedding rows ({embeddings.shape[0]}) != labeled nodes ({labels.n})"
        )
    x_all = embeddings
    if normalize:
        norms = np.linalg.norm(x_all, axis=1, keepdims=True)
        x_all = x_all / np.maximum(norms, 1e-12)
    report = EvalReport()
    counter = 0
    for ratio in ratios:
        for rep in range(repeats):
            train, test = split(labels, ratio, seed=seed + counter)
            counter += 1
            model = ovr_train(x_all[train], labels.indicator(train), reg=reg)
            ell = [len(labels.labels[i]) for i in test]
            preds = predict_topk(model, x_all[test], ell)
            truth = [labels.labels[i] for i in test]
            micro, macro = f1_scores(preds, truth, labels.n_labels)
            report.add(ratio, rep, micro, macro)
    return report
