"""CART decision trees and bootstrap-aggregated forests.

Trees grow by exhaustive split search under Gini impurity: every
(feature, midpoint threshold) for ordinal columns and every one-vs-rest
category for categorical columns. The only stopping control is the
minimum leaf size; there is no depth limit. Ties between equally good
splits resolve to the lower feature index, then the lower threshold or
category, so training is deterministic.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .seeding import rng_for

ORDINAL = "ordinal"
CATEGORICAL = "categorical"


@dataclass
class TreeNode:
    prediction: int
    counts: np.ndarray  # weighted class counts at the node
    n_samples: int
    feature: Optional[int] = None
    kind: Optional[str] = None
    threshold: Optional[float] = None  # ordinal: left is x <= threshold
    category: Optional[int] = None  # categorical: left is x == category
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0:
        return 0.0
    probs = counts / total
    return float(1.0 - np.sum(probs**2))


def _best_ordinal_split(x, onehot_w, min_leaf):
    """Lowest-impurity threshold for one ordinal column, or None."""
    n = len(x)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cw = np.cumsum(onehot_w[order], axis=0)
    pos = np.nonzero(xs[:-1] != xs[1:])[0]
    if len(pos) == 0:
        return None
    left_n = pos + 1
    ok = (left_n >= min_leaf) & ((n - left_n) >= min_leaf)
    pos = pos[ok]
    if len(pos) == 0:
        return None
    total_w = cw[-1]
    left_w = cw[pos]
    right_w = total_w[None, :] - left_w
    lt = left_w.sum(axis=1)
    rt = right_w.sum(axis=1)
    gl = 1.0 - np.sum((left_w / np.where(lt > 0, lt, 1.0)[:, None]) ** 2, axis=1)
    gr = 1.0 - np.sum((right_w / np.where(rt > 0, rt, 1.0)[:, None]) ** 2, axis=1)
    child = (np.where(lt > 0, lt * gl, 0.0) + np.where(rt > 0, rt * gr, 0.0)) / total_w.sum()
    best = int(np.argmin(child))  # ties: first, i.e. lowest threshold
    threshold = float((xs[pos[best]] + xs[pos[best] + 1]) / 2.0)
    return child[best], threshold


def _best_category_split(x, onehot_w, min_leaf):
    """Lowest-impurity one-vs-rest category for one categorical column."""
    n = len(x)
    cats = np.unique(x)
    if len(cats) < 2:
        return None
    total_w = onehot_w.sum(axis=0)
    best = None
    for c in cats:
        mask = x == c
        ln = int(mask.sum())
        if ln < min_leaf or (n - ln) < min_leaf:
            continue
        left_w = onehot_w[mask].sum(axis=0)
        right_w = total_w - left_w
        lt, rt = left_w.sum(), right_w.sum()
        child = (lt * _gini(left_w) + rt * _gini(right_w)) / total_w.sum()
        if best is None or child < best[0]:
            best = (child, int(c))
    return best


class TreeModel:
    """Single CART classifier."""

    kind = "cart"

    def __init__(self, root: TreeNode, n_classes: int, n_features: int, kinds, min_leaf):
        self.root = root
        self.n_classes = n_classes
        self.n_features = n_features
        self.kinds = tuple(kinds)
        self.min_leaf = min_leaf

    def _leaf_for(self, row) -> TreeNode:
        node = self.root
        while not node.is_leaf:
            if node.kind == ORDINAL:
                go_left = row[node.feature] <= node.threshold
            else:
                go_left = row[node.feature] == node.category
            node = node.left if go_left else node.right
        return node

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X)
        self._check_width(X)
        return np.array([self._leaf_for(r).prediction for r in X], dtype=np.int64)

    def decision_values(self, X) -> np.ndarray:
        X = np.asarray(X)
        self._check_width(X)
        out = np.zeros((len(X), self.n_classes))
        for i, r in enumerate(X):
            leaf = self._leaf_for(r)
            total = leaf.counts.sum()
            out[i] = leaf.counts / total if total > 0 else 0.0
        return out

    def _check_width(self, X):
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(f"expected {self.n_features} feature columns")

    def used_features(self) -> frozenset:
        used = set()

        def walk(node):
            if node is None or node.is_leaf:
                return
            used.add(node.feature)
            walk(node.left)
            walk(node.right)

        walk(self.root)
        return frozenset(used)

    def leaves(self) -> list:
        """(path decisions, leaf) pairs, left-to-right.

        Each decision is (feature, kind, payload, went_left) with payload
        the threshold or category.
        """
        out = []

        def walk(node, path):
            if node.is_leaf:
                out.append((tuple(path), node))
                return
            payload = node.threshold if node.kind == ORDINAL else node.category
            walk(node.left, path + [(node.feature, node.kind, payload, True)])
            walk(node.right, path + [(node.feature, node.kind, payload, False)])

        walk(self.root, [])
        return out


def _grow(X, y, w, kinds, min_leaf, n_classes, feature_subset, rng) -> TreeNode:
    counts = np.zeros(n_classes)
    np.add.at(counts, y, w)
    node = TreeNode(
        prediction=int(np.argmax(counts)), counts=counts, n_samples=len(y)
    )
    if len(y) < 2 * min_leaf or _gini(counts) == 0.0:
        return node
    onehot_w = np.zeros((len(y), n_classes))
    onehot_w[np.arange(len(y)), y] = w

    p = X.shape[1]
    if feature_subset is not None and feature_subset < p:
        candidates = np.sort(rng.choice(p, size=feature_subset, replace=False))
    else:
        candidates = np.arange(p)

    parent = _gini(counts)
    best = None  # (impurity, feature, split descriptor)
    sub = X[:, candidates]
    all_binary = bool(np.all((sub == 0.0) | (sub == 1.0))) and all(
        kinds[f] == ORDINAL for f in candidates
    )
    if all_binary:
        # one threshold (0.5) per 0/1 column; evaluate every candidate at once
        left_n = np.sum(sub == 0.0, axis=0)
        ok = (left_n >= min_leaf) & ((len(y) - left_n) >= min_leaf)
        if ok.any():
            left_w = (1.0 - sub).T @ onehot_w  # (features, classes)
            total_w = onehot_w.sum(axis=0)
            right_w = total_w[None, :] - left_w
            lt = left_w.sum(axis=1)
            rt = right_w.sum(axis=1)
            gl = 1.0 - np.sum((left_w / np.where(lt > 0, lt, 1.0)[:, None]) ** 2, axis=1)
            gr = 1.0 - np.sum((right_w / np.where(rt > 0, rt, 1.0)[:, None]) ** 2, axis=1)
            child = (np.where(lt > 0, lt * gl, 0.0) + np.where(rt > 0, rt * gr, 0.0)) / total_w.sum()
            child = np.where(ok, child, np.inf)
            j = int(np.argmin(child))  # ties: lowest candidate index
            if np.isfinite(child[j]):
                best = (float(child[j]), int(candidates[j]), (ORDINAL, 0.5))
    else:
        for f in candidates:
            col = X[:, f]
            if kinds[f] == ORDINAL:
                res = _best_ordinal_split(col, onehot_w, min_leaf)
                if res is not None and (best is None or res[0] < best[0]):
                    best = (res[0], int(f), (ORDINAL, res[1]))
            else:
                res = _best_category_split(col.astype(np.int64), onehot_w, min_leaf)
                if res is not None and (best is None or res[0] < best[0]):
                    best = (res[0], int(f), (CATEGORICAL, res[1]))
    if best is None or parent - best[0] <= 1e-12:
        return node
    _, f, (skind, payload) = best
    if skind == ORDINAL:
        mask = X[:, f] <= payload
        node.kind, node.threshold = ORDINAL, float(payload)
    else:
        mask = X[:, f] == payload
        node.kind, node.category = CATEGORICAL, int(payload)
    node.feature = f
    node.left = _grow(X[mask], y[mask], w[mask], kinds, min_leaf, n_classes, feature_subset, rng)
    node.right = _grow(
        X[~mask], y[~mask], w[~mask], kinds, min_leaf, n_classes, feature_subset, rng
    )
    return node


def train_cart(
    X,
    y,
    min_leaf: float = 1,
    kinds: Optional[Sequence[str]] = None,
    class_weights: Optional[np.ndarray] = None,
    n_classes: Optional[int] = None,
) -> TreeModel:
    """Grow one CART tree; min_leaf is the sole stopping control."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if min_leaf > len(y):
        raise DataError("min_leaf exceeds the number of samples")
    n_classes = n_classes or int(y.max()) + 1
    kinds = tuple(kinds) if kinds is not None else (ORDINAL,) * X.shape[1]
    w = np.ones(len(y)) if class_weights is None else np.asarray(class_weights)[y]
    rng = rng_for(0, "cart")  # unused when the subset covers all features
    root = _grow(X, y, w, kinds, min_leaf, n_classes, None, rng)
    return TreeModel(root, n_classes, X.shape[1], kinds, min_leaf)


class ForestModel:
    """Majority vote over bootstrap-resampled CART trees."""

    kind = "forest"

    def __init__(self, trees, n_classes, n_features, n_trees, seed):
        self.trees = trees
        self.n_classes = n_classes
        self.n_features = n_features
        self.n_trees = n_trees
        self.seed = seed

    def vote_counts(self, X) -> np.ndarray:
        votes = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            pred = tree.predict(X)
            votes[np.arange(len(X)), pred] += 1.0
        return votes

    def decision_values(self, X) -> np.ndarray:
        return self.vote_counts(X) / self.n_trees

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.vote_counts(X), axis=1).astype(np.int64)

    def used_features(self) -> frozenset:
        used = set()
        for tree in self.trees:
            used |= tree.used_features()
        return frozenset(used)


def train_rf(
    X,
    y,
    n_trees: int,
    min_leaf: float = 1,
    seed: int = 0,
    kinds: Optional[Sequence[str]] = None,
    class_weights: Optional[np.ndarray] = None,
    n_classes: Optional[int] = None,
    bootstrap: bool = True,
    feature_subset: Optional[str] = "sqrt",
) -> ForestModel:
    """Random forest: bootstrap resamples plus per-node feature subsets.

    Per-tree randomness derives from (seed, tree index), so a forest of
    n trees shares its first k trees with the k-tree forest of the same
    seed, and identical seeds give identical forests.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if min_leaf > len(y):
        raise DataError("min_leaf exceeds the number of samples")
    n_classes = n_classes or int(y.max()) + 1
    kinds = tuple(kinds) if kinds is not None else (ORDINAL,) * X.shape[1]
    w = np.ones(len(y)) if class_weights is None else np.asarray(class_weights)[y]
    subset = math.ceil(math.sqrt(X.shape[1])) if feature_subset == "sqrt" else None
    trees = []
    for t in range(n_trees):
        rng = rng_for(seed, "tree", t)
        idx = rng.integers(0, len(y), len(y)) if bootstrap else np.arange(len(y))
        root = _grow(X[idx], y[idx], w[idx], kinds, min_leaf, n_classes, subset, rng)
        trees.append(TreeModel(root, n_classes, X.shape[1], kinds, min_leaf))
    return ForestModel(trees, n_classes, X.shape[1], n_trees, seed)
