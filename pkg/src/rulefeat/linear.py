"""Linear classifiers trained from scratch.

Both learners share the same objective convention: sum of per-sample
class-weighted losses plus (1/C) times the penalty, so larger C means a
weaker penalty. Every model exposes an n x n_classes decision-value
matrix and predicts its argmax, breaking ties toward the lowest class
index.

Logistic regression trains one binary task per class (one-vs-rest) and
minimizes the weighted logistic loss with an L1 or L2 penalty by
accelerated proximal gradient descent (soft-thresholding handles the L1
term; the intercept is never penalized).

The linear SVM minimizes the weighted hinge loss with an L2 penalty.
Multi-class problems are trained pairwise (one task per class pair, each
on that pair's samples only) and aggregated into per-class one-vs-rest
decision values by vote counting with a bounded confidence adjustment;
hinge-loss one-per-class training is strictly weaker on tasks whose
"rest" side surrounds the class and cannot reach the scores the pairwise
scheme attains. The default solver is dual coordinate descent with the
per-sample box [0, C * weight], which converges at any penalty strength;
a mini-batch stochastic subgradient solver with iterate averaging is
available as an alternative. Either way the bias rides along as an extra
all-ones column, so it is weakly penalized.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError
from .seeding import rng_for

MAX_EPOCHS = 2000
PARAM_TOL = 1e-6
SVM_DUAL_TOL = 1e-2  # projected-gradient spread, in margin units


@dataclass
class LinearModel:
    """Per-class weight vectors and intercepts of a one-vs-rest model."""

    weights: np.ndarray  # (n_classes, n_features)
    intercepts: np.ndarray  # (n_classes,)
    penalty: str  # "l1" | "l2"
    C: float
    n_iter: tuple
    converged: bool

    kind = "linear"

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def decision_values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.n_features:
            raise DataError(f"expected {self.n_features} feature columns")
        return X @ self.weights.T + self.intercepts

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_values(X), axis=1).astype(np.int64)

    def nonzero_feature_count(self) -> int:
        """Features carrying a nonzero weight in at least one task."""
        return int(np.sum(np.any(self.weights != 0.0, axis=0)))


def _validate_xy(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite values in the input matrix")
    if len(np.unique(y)) < 2:
        raise DataError("training labels contain a single class")
    return X, y


def _sample_weights(y, n_classes, class_weights) -> np.ndarray:
    if class_weights is None:
        return np.ones(len(y))
    return np.asarray(class_weights, dtype=np.float64)[y]


def balanced_class_weights(y, n_classes: int) -> np.ndarray:
    """Weights n / (n_classes * class_count); zero-count classes get 0."""
    counts = np.bincount(y, minlength=n_classes)
    out = np.zeros(n_classes)
    present = counts > 0
    out[present] = len(y) / (n_classes * counts[present])
    return out


def logistic_loss_grad(beta, intercept, X, y_signed, sample_weight, C, penalty):
    """Objective and gradient of the smooth part of the logistic task.

    The L2 penalty is smooth and included here; for L1 the penalty is
    handled by the proximal step, so only the data term appears.
    """
    margins = X @ beta + intercept
    zy = -y_signed * margins
    loss = float(np.sum(sample_weight * np.logaddexp(0.0, zy)))
    sig = 1.0 / (1.0 + np.exp(-zy))  # d loss / d margin = -y * sigma(-y m)
    coef = sample_weight * (-y_signed) * sig
    grad_beta = X.T @ coef
    grad_intercept = float(np.sum(coef))
    if penalty == "l2":
        loss += 0.5 / C * float(beta @ beta)
        grad_beta = grad_beta + beta / C
    return loss, grad_beta, grad_intercept


def _soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _fit_logistic_task(X, y_signed, sample_weight, penalty, C, max_epochs, tol):
    """One binary task by FISTA with a fixed Lipschitz step."""
    n, d = X.shape
    sw_sqrt = np.sqrt(sample_weight)
    aug = np.hstack([X * sw_sqrt[:, None], sw_sqrt[:, None]])
    lip = 0.25 * np.linalg.norm(aug, 2) ** 2
    if penalty == "l2":
        lip += 1.0 / C
    step = 1.0 / max(lip, 1e-12)
    beta = np.zeros(d)
    intercept = 0.0
    beta_prev, intercept_prev = beta, intercept
    t_momentum = 1.0
    converged = False
    it = 0
    for it in range(1, max_epochs + 1):
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_momentum**2)) / 2.0
        accel = (t_momentum - 1.0) / t_next
        yb = beta + accel * (beta - beta_prev)
        yi = intercept + accel * (intercept - intercept_prev)
        _, g_beta, g_int = logistic_loss_grad(
            yb, yi, X, y_signed, sample_weight, C, penalty
        )
        beta_new = yb - step * g_beta
        if penalty == "l1":
            beta_new = _soft_threshold(beta_new, step / C)
        intercept_new = yi - step * g_int
        delta = max(
            float(np.max(np.abs(beta_new - beta), initial=0.0)),
            abs(intercept_new - intercept),
        )
        beta_prev, intercept_prev = beta, intercept
        beta, intercept = beta_new, intercept_new
        t_momentum = t_next
        if delta < tol:
            converged = True
            break
    return beta, intercept, it, converged


def train_logreg(
    X,
    y,
    penalty: str = "l2",
    C: float = 1.0,
    class_weights: Optional[np.ndarray] = None,
    max_epochs: int = MAX_EPOCHS,
    tol: float = PARAM_TOL,
    n_classes: Optional[int] = None,
) -> LinearModel:
    """One-vs-rest L1- or L2-penalized logistic regression."""
    if penalty not in ("l1", "l2"):
        raise DataError("penalty must be 'l1' or 'l2'")
    if C <= 0:
        raise DataError("C must be positive")
    X, y = _validate_xy(X, y)
    n_classes = n_classes or int(y.max()) + 1
    sw = _sample_weights(y, n_classes, class_weights)
    weights = np.zeros((n_classes, X.shape[1]))
    intercepts = np.zeros(n_classes)
    iters = []
    all_converged = True
    for c in range(n_classes):
        y_signed = np.where(y == c, 1.0, -1.0)
        beta, intercept, it, conv = _fit_logistic_task(
            X, y_signed, sw, penalty, C, max_epochs, tol
        )
        weights[c] = beta
        intercepts[c] = intercept
        iters.append(it)
        all_converged &= conv
    return LinearModel(weights, intercepts, penalty, C, tuple(iters), all_converged)


def svm_objective(beta_aug, X_aug, y_signed, sample_weight, C):
    """Weighted hinge loss plus (1/2C) ||w||^2 on the augmented vector."""
    margins = X_aug @ beta_aug
    hinge = np.maximum(0.0, 1.0 - y_signed * margins)
    return float(np.sum(sample_weight * hinge) + 0.5 / C * (beta_aug @ beta_aug))


def class_pairs(n_classes: int) -> tuple:
    """Ordered (a, b) class pairs with a < b."""
    return tuple(
        (a, b) for a in range(n_classes) for b in range(a + 1, n_classes)
    )


def pairwise_decision_values(pair_margins: np.ndarray, pairs, n_classes: int) -> np.ndarray:
    """Per-class scores from pairwise margins.

    Each pair votes for its winner (ties to the lower class index); the
    summed signed margins, squashed into (-1/3, 1/3), break ties between
    equal vote counts without ever overturning a one-vote gap.
    """
    n = pair_margins.shape[0]
    votes = np.zeros((n, n_classes))
    conf = np.zeros((n, n_classes))
    for k, (a, b) in enumerate(pairs):
        d = pair_margins[:, k]
        win_a = d >= 0
        votes[win_a, a] += 1.0
        votes[~win_a, b] += 1.0
        conf[:, a] += d
        conf[:, b] -= d
    return votes + conf / (3.0 * (np.abs(conf) + 1.0))


def _fit_svm_task_dual(X_aug, y_signed, sample_weight, C, seed, max_epochs, tol):
    """Dual coordinate descent with shrinking on the hinge task.

    Maintains w = sum_i alpha_i y_i x_i explicitly, so one coordinate
    update costs O(d). Coordinates are visited in seeded random
    permutations; bound coordinates whose KKT conditions already hold are
    shrunk out of the sweep and re-checked in a final full pass. Stops
    when the projected-gradient spread falls below ``tol``.
    """
    n, d = X_aug.shape
    box = C * sample_weight
    q_diag = np.einsum("ij,ij->i", X_aug, X_aug)
    rng = rng_for(seed, "svm-dual")
    alpha = np.zeros(n)
    w = np.zeros(d)
    eligible = np.arange(n)[(box > 0.0) & (q_diag > 0.0)]
    active = eligible
    pg_max_old = np.inf
    pg_min_old = -np.inf
    sweeps = 0
    converged = False
    trace = []
    while sweeps < max_epochs:
        sweeps += 1
        pg_max = -np.inf
        pg_min = np.inf
        keep = []
        for i in rng.permutation(active):
            grad = y_signed[i] * (X_aug[i] @ w) - 1.0
            if alpha[i] == 0.0:
                if grad > pg_max_old:
                    continue  # shrink: at lower bound, KKT satisfied
                pg = min(grad, 0.0)
            elif alpha[i] == box[i]:
                if grad < pg_min_old:
                    continue  # shrink: at upper bound, KKT satisfied
                pg = max(grad, 0.0)
            else:
                pg = grad
            keep.append(i)
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if pg != 0.0:
                new = min(max(alpha[i] - grad / q_diag[i], 0.0), box[i])
                delta = new - alpha[i]
                if delta != 0.0:
                    alpha[i] = new
                    w += delta * y_signed[i] * X_aug[i]
        trace.append(svm_objective(w, X_aug, y_signed, sample_weight, C))
        if pg_max - pg_min <= tol:
            if len(keep) == len(eligible):
                converged = True
                break
            # verify the shrunk coordinates with one full pass
            active = eligible
            pg_max_old = np.inf
            pg_min_old = -np.inf
            continue
        active = np.asarray(sorted(keep), dtype=np.int64)
        pg_max_old = pg_max if pg_max > 0 else np.inf
        pg_min_old = pg_min if pg_min < 0 else -np.inf
    return w, trace, sweeps, converged


def _fit_svm_task_subgradient(X_aug, y_signed, sample_weight, C, seed, max_epochs, tol, batch_size):
    """Averaged stochastic subgradient descent on the hinge objective.

    Uses the scaled objective (lam/2)||w||^2 + weighted-mean hinge with
    lam = 1 / (C * total_weight), the classic 1/(lam t) step, projection
    onto the ||w|| <= 1/sqrt(lam) ball, and a running average of the
    iterates after the first epoch. Returns the averaged vector and the
    objective trace recorded at epoch ends.
    """
    n, d = X_aug.shape
    total_w = float(np.sum(sample_weight))
    lam = 1.0 / (C * total_w)
    radius = 1.0 / np.sqrt(lam)
    rng = rng_for(seed, "svm")
    w = np.zeros(d)
    avg = np.zeros(d)
    n_avg = 0
    step_count = 0
    trace = []
    prev_avg = None
    epochs_run = 0
    converged = False
    for epoch in range(1, max_epochs + 1):
        epochs_run = epoch
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            step_count += 1
            eta = 1.0 / (lam * step_count)
            xb = X_aug[batch]
            margins = xb @ w
            viol = (y_signed[batch] * margins) < 1.0
            grad = lam * w
            if viol.any():
                coef = sample_weight[batch][viol] * y_signed[batch][viol]
                denom = max(float(np.sum(sample_weight[batch])), 1e-12)
                grad = grad - (xb[viol].T @ coef) / denom
            w = w - eta * grad
            norm = float(np.linalg.norm(w))
            if norm > radius:
                w *= radius / norm
            if epoch > 1:
                avg = (avg * n_avg + w) / (n_avg + 1)
                n_avg += 1
        current = avg if n_avg else w
        trace.append(svm_objective(current, X_aug, y_signed, sample_weight, C))
        if prev_avg is not None:
            delta = float(np.max(np.abs(current - prev_avg), initial=0.0))
            if delta < tol:
                converged = True
                break
        prev_avg = current.copy()
    return (avg if n_avg else w), trace, epochs_run, converged


@dataclass
class LinearSVMModel:
    """Pairwise linear SVM exposing one-vs-rest-shaped decision values."""

    weights: np.ndarray  # (n_pairs, n_features)
    intercepts: np.ndarray  # (n_pairs,)
    pairs: tuple
    n_classes: int
    C: float
    n_iter: tuple
    converged: bool

    kind = "linear_svm"
    penalty = "hinge"

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def pair_margins(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.n_features:
            raise DataError(f"expected {self.n_features} feature columns")
        return X @ self.weights.T + self.intercepts

    def decision_values(self, X) -> np.ndarray:
        return pairwise_decision_values(self.pair_margins(X), self.pairs, self.n_classes)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_values(X), axis=1).astype(np.int64)


def train_linear_svm(
    X,
    y,
    C: float = 1.0,
    class_weights: Optional[np.ndarray] = None,
    seed: int = 0,
    max_epochs: int = MAX_EPOCHS,
    tol: Optional[float] = None,
    batch_size: int = 64,
    n_classes: Optional[int] = None,
    record_trace: bool = False,
    solver: str = "dual",
) -> LinearSVMModel:
    """Pairwise linear SVM; deterministic for a fixed seed.

    Each class pair trains a binary hinge task on that pair's samples;
    the positive side is the lower class index. The "dual" solver
    (coordinate descent) is the default; "subgradient" selects averaged
    mini-batch stochastic subgradient descent, whose accuracy degrades
    for weak penalties (large C).
    """
    if C <= 0:
        raise DataError("C must be positive")
    if solver not in ("dual", "subgradient"):
        raise DataError("solver must be 'dual' or 'subgradient'")
    if tol is None:
        tol = SVM_DUAL_TOL if solver == "dual" else PARAM_TOL
    X, y = _validate_xy(X, y)
    n_classes = n_classes or int(y.max()) + 1
    sw = _sample_weights(y, n_classes, class_weights)
    pairs = class_pairs(n_classes)
    weights = np.zeros((len(pairs), X.shape[1]))
    intercepts = np.zeros(len(pairs))
    iters = []
    traces = []
    all_converged = True
    for k, (a, b) in enumerate(pairs):
        mask = (y == a) | (y == b)
        present = np.unique(y[mask])
        if len(present) < 2:
            # degenerate pair (a class missing): vote for the present side
            if len(present) == 1:
                intercepts[k] = 1.0 if present[0] == a else -1.0
            iters.append(0)
            traces.append([])
            continue
        X_pair = np.hstack([X[mask], np.ones((int(mask.sum()), 1))])
        y_signed = np.where(y[mask] == a, 1.0, -1.0)
        if solver == "dual":
            vec, trace, it, conv = _fit_svm_task_dual(
                X_pair, y_signed, sw[mask], C, seed + k, max_epochs, tol
            )
        else:
            vec, trace, it, conv = _fit_svm_task_subgradient(
                X_pair, y_signed, sw[mask], C, seed + k, max_epochs, tol, batch_size
            )
        weights[k] = vec[:-1]
        intercepts[k] = vec[-1]
        iters.append(it)
        traces.append(trace)
        all_converged &= conv
    model = LinearSVMModel(
        weights, intercepts, pairs, n_classes, C, tuple(iters), all_converged
    )
    if record_trace:
        return model, traces
    return model
