"""Alternative rule extractors: decision-tree paths and class-consequent
association rules.

Tree-path mining grows a Gini CART on the binned data with the minimum
leaf size as the only stopping control and converts each root-to-leaf
path into a rule by intersecting the per-feature constraints along the
path. Association-rule mining runs a level-wise frequent-itemset search
over (feature, single level) items and pairs each frequent itemset with
each class, applying the same z / class-size quality gate as the
exhaustive miner but no nesting resolution.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .mining import (
    BinnedView,
    score_rule,
    select_rules,
    size_threshold,
)
from .preprocess import feature_levels
from .rules import CategoryCondition, IntervalCondition, Rule, RuleSet
from .schema import CATEGORICAL, Dataset
from .trees import CATEGORICAL as TREE_CATEGORICAL
from .trees import ORDINAL, train_cart


@dataclass(frozen=True)
class TreePathRule:
    """Decisions from root to leaf plus the leaf's majority class."""

    decisions: tuple  # (feature, kind, payload, went_left) per node
    leaf_class: int
    leaf_size: int


def minority_share(labels: np.ndarray, n_classes: int) -> float:
    counts = np.bincount(labels, minlength=n_classes)
    return float(counts[counts > 0].min() / len(labels))


def default_min_leaf(ds: Dataset, n_bins: int = 10) -> float:
    """Leaf-size floor: samples / bins * minority-class share."""
    return size_threshold(ds.n, n_bins, minority_share(ds.labels, ds.schema.n_classes))


def _path_to_conditions(path, ds: Dataset) -> tuple:
    """Intersect the per-feature constraints accumulated along a path."""
    intervals: dict = {}
    catsets: dict = {}
    for feature, kind, payload, went_left in path:
        if kind == ORDINAL:
            levels = feature_levels(ds, feature)
            lo, hi = intervals.get(feature, (int(levels[0]), int(levels[-1])))
            if went_left:
                hi = min(hi, int(np.floor(payload)))
            else:
                lo = max(lo, int(np.floor(payload)) + 1)
            intervals[feature] = (lo, hi)
        else:
            full = set(int(v) for v in feature_levels(ds, feature))
            current = catsets.get(feature, full)
            if went_left:
                current = current & {int(payload)}
            else:
                current = current - {int(payload)}
            catsets[feature] = current
    conditions = []
    for feature, (lo, hi) in intervals.items():
        if lo > hi:
            raise DataError("contradictory path constraints")
        conditions.append(IntervalCondition(feature, lo, hi))
    for feature, cats in catsets.items():
        if not cats:
            raise DataError("contradictory path constraints")
        conditions.append(CategoryCondition(feature, frozenset(cats)))
    return tuple(conditions)


def mine_tree_rules(ds: Dataset, min_leaf: float = None) -> RuleSet:
    """Rules from the leaves of a Gini CART grown on the binned data."""
    if not ds.binned:
        raise DataError("tree mining requires a binned dataset")
    if min_leaf is None:
        min_leaf = default_min_leaf(ds)
    if min_leaf > ds.n:
        raise DataError("min_leaf exceeds the number of samples")
    X = np.column_stack([ds.column(i) for i in range(ds.schema.n_features)]).astype(
        np.float64
    )
    kinds = tuple(
        TREE_CATEGORICAL if f.kind == CATEGORICAL else ORDINAL
        for f in ds.schema.features
    )
    tree = train_cart(
        X, ds.labels, min_leaf=min_leaf, kinds=kinds, n_classes=ds.schema.n_classes
    )
    view = BinnedView.from_dataset(ds)
    rules = []
    for path, leaf in tree.leaves():
        conditions = _path_to_conditions(path, ds)
        stats = score_rule(conditions, leaf.prediction, view)
        rules.append(Rule(conditions=conditions, target_class=leaf.prediction, stats=stats))
    return RuleSet(rules, n_classes=ds.schema.n_classes)


def tree_path_rules(ds: Dataset, min_leaf: float = None) -> list:
    """The raw path rules (decisions, class, size) behind mine_tree_rules."""
    if not ds.binned:
        raise DataError("tree mining requires a binned dataset")
    if min_leaf is None:
        min_leaf = default_min_leaf(ds)
    X = np.column_stack([ds.column(i) for i in range(ds.schema.n_features)]).astype(
        np.float64
    )
    kinds = tuple(
        TREE_CATEGORICAL if f.kind == CATEGORICAL else ORDINAL
        for f in ds.schema.features
    )
    tree = train_cart(
        X, ds.labels, min_leaf=min_leaf, kinds=kinds, n_classes=ds.schema.n_classes
    )
    return [
        TreePathRule(decisions=path, leaf_class=leaf.prediction, leaf_size=leaf.n_samples)
        for path, leaf in tree.leaves()
    ]


def frequent_itemsets(transactions: list, min_support: float, max_items: int = 3) -> dict:
    """Level-wise frequent-itemset search.

    ``transactions`` is a list of item sets; the result maps each
    frequent itemset (frozenset) to its absolute support count. Every
    subset of a frequent itemset is frequent, so level k candidates are
    joined from level k-1 sets sharing all but their last item and kept
    only if all their (k-1)-subsets are frequent.
    """
    counts: dict = {}
    for t in transactions:
        for item in t:
            key = frozenset((item,))
            counts[key] = counts.get(key, 0) + 1
    frequent = {k: v for k, v in counts.items() if v >= min_support}
    result = dict(frequent)
    level = sorted(frequent, key=lambda s: tuple(sorted(s)))
    k = 1
    while level and k < max_items:
        k += 1
        candidates = set()
        for a, b in itertools.combinations(level, 2):
            union = a | b
            if len(union) != k:
                continue
            if all(frozenset(sub) in result for sub in itertools.combinations(union, k - 1)):
                candidates.add(union)
        counts = {c: 0 for c in candidates}
        for t in transactions:
            for c in candidates:
                if c <= t:
                    counts[c] += 1
        frequent = {c: v for c, v in counts.items() if v >= min_support}
        result.update(frequent)
        level = sorted(frequent, key=lambda s: tuple(sorted(s)))
    return result


def _itemset_to_conditions(itemset, ds: Dataset) -> tuple:
    conditions = []
    for feature, level in sorted(itemset):
        if ds.schema.features[feature].kind == CATEGORICAL:
            conditions.append(CategoryCondition(feature, frozenset((level,))))
        else:
            conditions.append(IntervalCondition(feature, level, level))
    return tuple(conditions)


def mine_assoc_rules(
    ds: Dataset,
    min_support: float = None,
    z_min: float = 1.96,
    size_thresholds=None,
    threshold_bins: int = 10,
    max_items: int = 3,
) -> RuleSet:
    """Class-consequent association rules over single-level items.

    Defaults: minimum support is the minority-class size threshold, and
    the per-class size gate uses the same samples/bins*share formula as
    the exhaustive miner. Only the quality gate applies; nested rules are
    kept as-is.
    """
    if not ds.binned:
        raise DataError("association mining requires a binned dataset")
    n_classes = ds.schema.n_classes
    shares = np.bincount(ds.labels, minlength=n_classes) / ds.n
    if min_support is None:
        min_support = size_threshold(
            ds.n, threshold_bins, minority_share(ds.labels, n_classes)
        )
    if size_thresholds is None:
        size_thresholds = [
            size_threshold(ds.n, threshold_bins, float(s)) if s > 0 else 0.0
            for s in shares
        ]
    elif np.isscalar(size_thresholds):
        size_thresholds = [float(size_thresholds)] * n_classes
    transactions = [
        frozenset((f, int(ds.column(f)[r])) for f in range(ds.schema.n_features))
        for r in range(ds.n)
    ]
    itemsets = frequent_itemsets(transactions, min_support, max_items)
    view = BinnedView.from_dataset(ds)
    selected = []
    for itemset in sorted(itemsets, key=lambda s: tuple(sorted(s))):
        conditions = _itemset_to_conditions(itemset, ds)
        for cls in range(n_classes):
            if shares[cls] == 0:
                continue
            stats = score_rule(conditions, cls, view)
            rule = Rule(conditions=conditions, target_class=cls, stats=stats)
            selected.extend(select_rules([rule], z_min, size_thresholds[cls]))
    return RuleSet(selected, n_classes=n_classes)
