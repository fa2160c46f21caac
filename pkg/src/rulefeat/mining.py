"""Exhaustive supervised rule mining on binned data.

For every feature tuple up to the configured dimension and every target
class, the miner enumerates all candidate conditions (contiguous bin
intervals for continuous features, non-empty category subsets for
categorical ones), scores each candidate region's class
over-concentration, keeps candidates clearing both quality thresholds,
and finally removes nested rules so that only the most discriminative
and covering representatives survive.

Selection applies two thresholds:

* an over-concentration score z >= z_min, where for a rule with support
  n, in-rule class share p, and population class share p0,
  z = sqrt(n) * (p - p0) / sqrt(p * (1 - p0));
* a minimum in-rule target-class count of
  n_samples / n_bins * class_share.

The z denominator above is the default ("mixed"); the conventional
one-proportion form sqrt(p0 * (1 - p0)) is available as "population".
"""

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .preprocess import feature_levels
from .rules import CategoryCondition, IntervalCondition, Rule, RuleSet, RuleStats
from .schema import CATEGORICAL, CONTINUOUS, Dataset

Z_DENOMINATORS = ("mixed", "population")


@dataclass(frozen=True)
class MiningConfig:
    max_dimension: int = 1
    z_min: float = 1.96
    threshold_bins: int = 10
    z_denominator: str = "mixed"

    def __post_init__(self):
        if self.max_dimension not in (1, 2):
            raise DataError("max_dimension must be 1 or 2")
        if self.z_min <= 0:
            raise DataError("z_min must be positive")
        if self.threshold_bins < 1:
            raise DataError("threshold_bins must be >= 1")
        if self.z_denominator not in Z_DENOMINATORS:
            raise DataError(f"z_denominator must be one of {Z_DENOMINATORS}")


@dataclass(frozen=True)
class BinnedView:
    """Minimal mining substrate: level columns, kinds, labels.

    ``level_values[i]`` lists the valid level values of feature ``i``
    (bin indices 1..k for binned continuous features, category indices
    0..k-1 for categorical ones).
    """

    columns: tuple
    kinds: tuple
    level_values: tuple
    labels: np.ndarray
    n_classes: int

    @classmethod
    def from_dataset(cls, ds: Dataset) -> "BinnedView":
        if not ds.binned and any(f.kind == CONTINUOUS for f in ds.schema.features):
            raise DataError("mining requires a binned dataset")
        if ds.has_missing():
            raise DataError("mining requires an imputed dataset")
        levels = tuple(feature_levels(ds, i) for i in range(ds.schema.n_features))
        return cls(
            columns=tuple(np.asarray(c, dtype=np.int64) for c in ds.columns),
            kinds=tuple(f.kind for f in ds.schema.features),
            level_values=levels,
            labels=ds.labels,
            n_classes=ds.schema.n_classes,
        )

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_features(self) -> int:
        return len(self.columns)

    def class_shares(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes) / self.n


def z_score_value(n: int, p: float, p0: float, denominator: str = "mixed") -> float:
    """Over-concentration score of a rule; -inf when unscorable (p = 0)."""
    if n <= 0 or p <= 0.0:
        return float("-inf")
    if denominator == "mixed":
        den = np.sqrt(p * (1.0 - p0))
    else:
        den = np.sqrt(p0 * (1.0 - p0))
    if den == 0.0:
        return float("-inf")
    return float(np.sqrt(n) * (p - p0) / den)


def size_threshold(n_samples: int, n_bins: int, class_share: float) -> float:
    """Minimum in-rule class count: samples / bins * class share."""
    if n_samples <= 0 or n_bins <= 0 or class_share < 0:
        raise DataError("size_threshold arguments must be positive")
    return n_samples / n_bins * class_share


def enumerate_candidates_1d(feature: int, kind: str, levels: Sequence[int]) -> list:
    """All single-feature candidate conditions, in canonical order.

    Continuous: every contiguous bin interval, k*(k+1)/2 of them, ordered
    by (lo, hi). Categorical: every non-empty category subset, 2^k - 1 of
    them, ordered by (size, members).
    """
    levels = list(levels)
    if not levels:
        raise DataError("feature has no levels")
    if kind == CATEGORICAL:
        out = []
        for size in range(1, len(levels) + 1):
            for combo in itertools.combinations(levels, size):
                out.append(CategoryCondition(feature, frozenset(int(c) for c in combo)))
        return out
    out = []
    for a in range(len(levels)):
        for b in range(a, len(levels)):
            out.append(IntervalCondition(feature, int(levels[a]), int(levels[b])))
    return out


def enumerate_candidates_multi(per_feature_candidates: Sequence[list]) -> list:
    """Cross product of univariate candidate lists, as condition tuples."""
    return [tuple(combo) for combo in itertools.product(*per_feature_candidates)]


def _condition_level_matrix(conditions: list, levels: np.ndarray) -> np.ndarray:
    """(n_candidates, n_levels) membership of each level in each condition."""
    m = np.zeros((len(conditions), len(levels)), dtype=np.float64)
    level_pos = {int(v): j for j, v in enumerate(levels)}
    for i, cond in enumerate(conditions):
        for lv in cond.levels():
            m[i, level_pos[int(lv)]] = 1.0
    return m


def score_rule(
    conditions, target_class: int, data, denominator: str = "mixed"
) -> RuleStats:
    """Stats of one candidate by direct membership counting."""
    view = data if isinstance(data, BinnedView) else BinnedView.from_dataset(data)
    mask = np.ones(view.n, dtype=bool)
    for cond in conditions:
        mask &= cond.matches(view.columns[cond.feature])
    n = int(mask.sum())
    class_count = int(np.sum(view.labels[mask] == target_class))
    p0 = float(np.mean(view.labels == target_class))
    p = class_count / n if n > 0 else 0.0
    return RuleStats(
        n=n, class_count=class_count, p=p, p0=p0, z=z_score_value(n, p, p0, denominator)
    )


def _stats_for_counts(n, class_count, p0, denominator):
    """Vectorized z over candidate count arrays; unscorable -> -inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, class_count / np.maximum(n, 1), 0.0)
        if denominator == "mixed":
            den = np.sqrt(p * (1.0 - p0))
        else:
            den = np.full_like(p, np.sqrt(p0 * (1.0 - p0)))
        z = np.sqrt(n) * (p - p0) / den
    z = np.where((n > 0) & (p > 0) & (den > 0), z, -np.inf)
    return p, z


def select_rules(rules: Sequence[Rule], z_min: float, threshold: float) -> list:
    """Quality gate: keep rules with z >= z_min and class count >= threshold."""
    return [
        r
        for r in rules
        if r.stats is not None
        and r.stats.z >= z_min
        and r.stats.class_count >= threshold
    ]


def _drop_pass_inner(rules: list) -> list:
    """Remove rules lying inside an equally good or better covering rule."""
    keep = []
    for r in rules:
        doomed = any(
            r.nested_in(other) and other.stats.z >= r.stats.z for other in rules
        )
        if not doomed:
            keep.append(r)
    return keep


def _drop_pass_outer(rules: list) -> list:
    """Remove rules covering a strictly better inner rule (continuous only)."""
    keep = []
    for r in rules:
        doomed = any(
            other.nested_in(r) and other.stats.z > r.stats.z for other in rules
        )
        if not doomed:
            keep.append(r)
    return keep


def prune_nested(rules: Sequence[Rule]) -> list:
    """Resolve nested rules of one class.

    Nesting is only defined between rules on the identical feature set.
    Inner rules dominated by a covering rule with at least their z are
    removed first; then, unless the feature set is purely categorical,
    covering rules dominated by a strictly better inner rule are removed.
    Both passes repeat until nothing changes, so survivors on continuous
    feature sets are pairwise non-nested.
    """
    groups: dict = {}
    for r in rules:
        groups.setdefault(r.features, []).append(r)
    out = []
    for features, group in groups.items():
        purely_categorical = all(
            isinstance(c, CategoryCondition) for c in group[0].conditions
        )
        current = list(group)
        while True:
            after = _drop_pass_inner(current)
            if not purely_categorical:
                after = _drop_pass_outer(after)
            if len(after) == len(current):
                break
            current = after
        out.extend(current)
    return out


def _score_tuple(view: BinnedView, features: tuple, per_feature_conditions: list):
    """Candidate stats for one feature tuple via level histograms.

    Counting goes through a joint (levels x classes) histogram and the
    per-candidate level-membership matrices, so cost is independent of
    how many candidates a feature has once the histogram is built.
    """
    level_arrays = [view.level_values[f] for f in features]
    matrices = [
        _condition_level_matrix(conds, levels)
        for conds, levels in zip(per_feature_conditions, level_arrays)
    ]
    pos_columns = []
    for f, levels in zip(features, level_arrays):
        level_pos = {int(v): j for j, v in enumerate(levels)}
        pos_columns.append(np.array([level_pos[int(v)] for v in view.columns[f]]))
    if len(features) == 1:
        k = len(level_arrays[0])
        hist = np.zeros((k, view.n_classes))
        np.add.at(hist, (pos_columns[0], view.labels), 1.0)
        counts = matrices[0] @ hist  # (c1, classes)
    else:
        k1, k2 = len(level_arrays[0]), len(level_arrays[1])
        hist = np.zeros((k1, k2, view.n_classes))
        np.add.at(hist, (pos_columns[0], pos_columns[1], view.labels), 1.0)
        counts = np.einsum("ak,kmc,bm->abc", matrices[0], hist, matrices[1])
        counts = counts.reshape(-1, view.n_classes)  # row-major: c1-major order
    return counts


def mine(data, config: MiningConfig = MiningConfig()) -> RuleSet:
    """Run the full enumerate / score / select / prune pipeline.

    Accepts a binned Dataset or a BinnedView. The result is canonically
    ordered and independent of enumeration or scheduling order.
    """
    view = data if isinstance(data, BinnedView) else BinnedView.from_dataset(data)
    shares = view.class_shares()
    thresholds = [
        size_threshold(view.n, config.threshold_bins, float(s)) if s > 0 else 0.0
        for s in shares
    ]
    per_feature = [
        enumerate_candidates_1d(f, view.kinds[f], view.level_values[f])
        for f in range(view.n_features)
    ]
    selected: list = []
    for d in range(1, config.max_dimension + 1):
        for features in itertools.combinations(range(view.n_features), d):
            cond_lists = [per_feature[f] for f in features]
            counts = _score_tuple(view, features, cond_lists)
            if d == 1:
                tuples = [(c,) for c in cond_lists[0]]
            else:
                tuples = enumerate_candidates_multi(cond_lists)
            n = counts.sum(axis=1)
            for cls in range(view.n_classes):
                if shares[cls] == 0:
                    continue
                p0 = float(shares[cls])
                cc = counts[:, cls]
                p, z = _stats_for_counts(n, cc, p0, config.z_denominator)
                ok = (z >= config.z_min) & (cc >= thresholds[cls])
                idx = np.nonzero(ok)[0]
                candidates = [
                    Rule(
                        conditions=tuples[i],
                        target_class=cls,
                        stats=RuleStats(
                            n=int(n[i]),
                            class_count=int(cc[i]),
                            p=float(p[i]),
                            p0=p0,
                            z=float(z[i]),
                        ),
                    )
                    for i in idx
                ]
                selected.extend(prune_nested(candidates))
    return RuleSet(selected, n_classes=view.n_classes)
