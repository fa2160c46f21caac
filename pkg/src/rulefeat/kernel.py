"""Kernelized support vector machine with an RBF kernel.

Multi-class problems train one binary hinge task per class pair on that
pair's samples and aggregate pairwise margins into per-class
one-vs-rest-shaped decision values by vote counting (see
:func:`rulefeat.linear.pairwise_decision_values`). Each task solves the
box-constrained dual of the cost-weighted C-SVM by coordinate ascent:
the bias is absorbed into the kernel (K + 1), which removes the dual
equality constraint, and every dual coefficient stays inside
[0, C * sample_weight]. Sweeps run in a fixed index order, so training
is fully deterministic.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError
from .linear import class_pairs, pairwise_decision_values

MAX_SWEEPS = 1000
DUAL_TOL = 1e-2  # projected-gradient spread, in margin units


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for all pairs."""
    a2 = np.sum(A * A, axis=1)[:, None]
    b2 = np.sum(B * B, axis=1)[None, :]
    d2 = np.maximum(a2 + b2 - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * d2)


def default_gamma(X: np.ndarray) -> float:
    """1 / (n_features * overall variance), with a guard for constants."""
    var = float(np.var(X))
    if var <= 0.0:
        return 1.0
    return 1.0 / (X.shape[1] * var)


@dataclass
class KernelModel:
    """Stored training samples with signed dual coefficients per pair task."""

    support: np.ndarray  # training inputs, (n, d)
    dual_coef: np.ndarray  # alpha_i * y_i per pair task, (n_pairs, n)
    pair_intercepts: np.ndarray  # degenerate-pair fallback offsets
    pairs: tuple
    n_classes: int
    gamma: float
    C: float
    n_iter: tuple
    converged: bool

    kind = "rbf_svm"

    @property
    def n_features(self) -> int:
        return self.support.shape[1]

    def pair_margins(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.n_features:
            raise DataError(f"expected {self.n_features} feature columns")
        k = rbf_kernel(X, self.support, self.gamma) + 1.0  # +1 carries the bias
        return k @ self.dual_coef.T + self.pair_intercepts

    def decision_values(self, X) -> np.ndarray:
        return pairwise_decision_values(self.pair_margins(X), self.pairs, self.n_classes)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_values(X), axis=1).astype(np.int64)


def _solve_task(K1, y_signed, box, max_sweeps, tol):
    """Coordinate ascent with shrinking on the dual of one binary task.

    Maintains the fit vector f_i = sum_j alpha_j y_j K1_ij, so one
    update costs O(n). Bound coordinates whose KKT conditions already
    hold are shrunk out of the sweep and re-checked in a full pass; the
    solver stops when the projected-gradient spread falls below ``tol``.
    """
    n = len(y_signed)
    alpha = np.zeros(n)
    f = np.zeros(n)
    diag = np.diag(K1)
    eligible = np.arange(n)[(box > 0.0) & (diag > 0.0)]
    active = eligible
    pg_max_old = np.inf
    pg_min_old = -np.inf
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        pg_max = -np.inf
        pg_min = np.inf
        keep = []
        for i in active:
            grad = y_signed[i] * f[i] - 1.0  # gradient of the negated dual
            if alpha[i] == 0.0:
                if grad > pg_max_old:
                    continue
                pg = min(grad, 0.0)
            elif alpha[i] == box[i]:
                if grad < pg_min_old:
                    continue
                pg = max(grad, 0.0)
            else:
                pg = grad
            keep.append(i)
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if pg != 0.0:
                new = min(max(alpha[i] - grad / diag[i], 0.0), box[i])
                delta = new - alpha[i]
                if delta != 0.0:
                    alpha[i] = new
                    f += delta * y_signed[i] * K1[i]
        if pg_max - pg_min <= tol:
            if len(keep) == len(eligible):
                converged = True
                break
            active = eligible
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        active = np.asarray(keep, dtype=np.int64)
        pg_max_old = pg_max if pg_max > 0 else np.inf
        pg_min_old = pg_min if pg_min < 0 else -np.inf
    return alpha, sweeps, converged


def train_rbf_svm(
    X,
    y,
    C: float = 1.0,
    gamma: Optional[float] = None,
    class_weights: Optional[np.ndarray] = None,
    max_sweeps: int = MAX_SWEEPS,
    tol: float = DUAL_TOL,
    n_classes: Optional[int] = None,
) -> KernelModel:
    """Pairwise RBF SVM with per-sample cost C * class weight."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite values in the input matrix")
    if len(np.unique(y)) < 2:
        raise DataError("training labels contain a single class")
    if C <= 0:
        raise DataError("C must be positive")
    if gamma is None:
        gamma = default_gamma(X)
    if gamma <= 0:
        raise DataError("gamma must be positive")
    n_classes = n_classes or int(y.max()) + 1
    sw = (
        np.ones(len(y))
        if class_weights is None
        else np.asarray(class_weights, dtype=np.float64)[y]
    )
    pairs = class_pairs(n_classes)
    K1 = rbf_kernel(X, X, gamma) + 1.0
    dual = np.zeros((len(pairs), len(y)))
    intercepts = np.zeros(len(pairs))
    iters = []
    all_converged = True
    for k, (a, b) in enumerate(pairs):
        mask = (y == a) | (y == b)
        present = np.unique(y[mask])
        if len(present) < 2:
            if len(present) == 1:
                intercepts[k] = 1.0 if present[0] == a else -1.0
            iters.append(0)
            continue
        idx = np.nonzero(mask)[0]
        y_signed = np.where(y[idx] == a, 1.0, -1.0)
        alpha, sweeps, conv = _solve_task(
            K1[np.ix_(idx, idx)], y_signed, C * sw[idx], max_sweeps, tol
        )
        dual[k, idx] = alpha * y_signed
        iters.append(sweeps)
        all_converged &= conv
    return KernelModel(
        X.copy(), dual, intercepts, pairs, n_classes, float(gamma), C,
        tuple(iters), all_converged,
    )
