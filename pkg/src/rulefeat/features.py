"""Rule-derived local features.

Each rule becomes one column of the local feature matrix. Rules on
categorical features contribute plain 0/1 membership. Rules on
continuous features contribute a center distance: with the rule's bin
bounds mapped back to original-scale values, the rule center is the
interval midpoint, the per-feature closeness is

    delta_i = 1 - |x_i - center_i| / (max(X_i) - min(X_i)),

and the column value is

    rule_weight * sqrt(sum_i (feature_weight_i * delta_i)^2),

so a sample sitting exactly at the center of a one-condition rule scores
the full rule weight. Mixed rules gate the distance by their categorical
conditions: samples failing any of them score 0. Rule weights are the
rules' z-scores; feature weights are each feature's frequency of
appearance among the final rules (per class by default).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError
from .preprocess import BinMap
from .rules import CategoryCondition, IntervalCondition, Rule, RuleSet
from .schema import CONTINUOUS, Dataset

ENCODING_DEFAULT = "default"
ENCODING_BINARY = "binary"
FREQUENCY_PER_CLASS = "per_class"
FREQUENCY_GLOBAL = "global"


@dataclass(frozen=True)
class DeltaWeights:
    """Weights and original-scale ranges used by the center distance."""

    feature_frequency: dict  # (scope, feature) -> frequency in (0, 1]
    ranges: dict  # feature -> (min, max) of the fit column
    mode: str

    @classmethod
    def fit(
        cls, ruleset: RuleSet, train: Dataset, mode: str = FREQUENCY_PER_CLASS
    ) -> "DeltaWeights":
        """Frequencies from the final rule set, ranges from the fit data.

        ``train`` must hold original-scale (unbinned, imputed) values.
        """
        if mode not in (FREQUENCY_PER_CLASS, FREQUENCY_GLOBAL):
            raise DataError(f"unknown frequency mode {mode!r}")
        if train.binned:
            raise DataError("ranges must come from unbinned values")
        freq: dict = {}
        scopes: dict = {}
        for rule in ruleset:
            scope = rule.target_class if mode == FREQUENCY_PER_CLASS else None
            scopes[scope] = scopes.get(scope, 0) + 1
            for cond in rule.conditions:
                key = (scope, cond.feature)
                freq[key] = freq.get(key, 0) + 1
        frequency = {key: count / scopes[key[0]] for key, count in freq.items()}
        ranges = {}
        for i, spec in enumerate(train.schema.features):
            if spec.kind == CONTINUOUS:
                col = train.column(i)
                ranges[i] = (float(np.min(col)), float(np.max(col)))
        return cls(feature_frequency=frequency, ranges=ranges, mode=mode)

    def to_dict(self) -> dict:
        return {
            "frequency": {
                f"{'' if s is None else s}:{f}": v
                for (s, f), v in sorted(self.feature_frequency.items(), key=repr)
            },
            "ranges": {str(k): list(v) for k, v in sorted(self.ranges.items())},
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeltaWeights":
        freq = {}
        for key, v in d["frequency"].items():
            s, f = key.split(":")
            freq[(None if s == "" else int(s), int(f))] = float(v)
        ranges = {int(k): (float(v[0]), float(v[1])) for k, v in d["ranges"].items()}
        return cls(feature_frequency=freq, ranges=ranges, mode=d["mode"])

    def frequency(self, rule_class: int, feature: int) -> float:
        scope = rule_class if self.mode == FREQUENCY_PER_CLASS else None
        return self.feature_frequency[(scope, feature)]

    def feature_range(self, feature: int) -> tuple[float, float]:
        lo, hi = self.ranges[feature]
        if hi <= lo:
            raise DataError(f"feature {feature} has zero range")
        return lo, hi


def rule_center(cond: IntervalCondition, binmap: BinMap) -> float:
    lo, hi = binmap.bin_bounds(cond.feature, cond.lo, cond.hi)
    return lo + (hi - lo) / 2.0


def _delta_column(values: np.ndarray, center: float, lo: float, hi: float) -> np.ndarray:
    """Per-sample closeness to the center, clamped into the fit range."""
    x = np.clip(values, lo, hi)
    return 1.0 - np.abs(x - center) / (hi - lo)


def delta_distance(sample, rule: Rule, weights: DeltaWeights, binmap: BinMap) -> float:
    """Center distance of one sample (original-scale values) to one rule."""
    if rule.stats is None:
        raise DataError("rule has no stats; mine rules before transforming")
    total = 0.0
    for cond in rule.conditions:
        if not isinstance(cond, IntervalCondition):
            raise DataError("delta_distance applies to continuous conditions only")
        lo, hi = weights.feature_range(cond.feature)
        center = rule_center(cond, binmap)
        x = min(max(float(sample[cond.feature]), lo), hi)
        delta = 1.0 - abs(x - center) / (hi - lo)
        w_i = weights.frequency(rule.target_class, cond.feature)
        total += (w_i * delta) ** 2
    return rule.stats.z * math.sqrt(total)


@dataclass(frozen=True)
class LocalFeatureMatrix:
    """Samples x rules matrix with column metadata."""

    values: np.ndarray
    rules: tuple

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]


def transform(
    ds: Dataset,
    ruleset: RuleSet,
    binmap: BinMap,
    weights: Optional[DeltaWeights] = None,
    encoding: str = ENCODING_DEFAULT,
) -> LocalFeatureMatrix:
    """Build the local feature matrix of a dataset under a rule set.

    ``ds`` holds original-scale imputed values; membership of interval
    conditions is evaluated on the quantized view, center distances on
    the original columns. With the binary encoding every column is plain
    rule membership (used for tree- and itemset-derived rules).
    """
    if ds.binned:
        raise DataError("transform expects original-scale values")
    if encoding not in (ENCODING_DEFAULT, ENCODING_BINARY):
        raise DataError(f"unknown encoding {encoding!r}")
    if encoding == ENCODING_DEFAULT and weights is None and len(ruleset):
        raise DataError("default encoding needs fitted DeltaWeights")
    for rule in ruleset:
        for cond in rule.conditions:
            if cond.feature >= ds.schema.n_features:
                raise DataError("rule references an unknown feature")
    binned = binmap.apply(ds)
    columns = []
    for rule in ruleset:
        member = rule.matches(binned.columns)
        if encoding == ENCODING_BINARY:
            columns.append(member.astype(np.float64))
            continue
        interval_conds = [
            c for c in rule.conditions if isinstance(c, IntervalCondition)
        ]
        if not interval_conds:
            columns.append(member.astype(np.float64))
            continue
        if rule.stats is None:
            raise DataError("rule has no stats; mine rules before transforming")
        total = np.zeros(ds.n)
        for cond in interval_conds:
            lo, hi = weights.feature_range(cond.feature)
            center = rule_center(cond, binmap)
            delta = _delta_column(ds.column(cond.feature), center, lo, hi)
            w_i = weights.frequency(rule.target_class, cond.feature)
            total += (w_i * delta) ** 2
        col = rule.stats.z * np.sqrt(total)
        if len(interval_conds) < len(rule.conditions):
            # mixed rule: distance only where the categorical part holds
            gate = np.ones(ds.n, dtype=bool)
            for cond in rule.conditions:
                if isinstance(cond, CategoryCondition):
                    gate &= cond.matches(ds.column(cond.feature))
            col = np.where(gate, col, 0.0)
        columns.append(col)
    values = np.column_stack(columns) if columns else np.zeros((ds.n, 0))
    return LocalFeatureMatrix(values=values, rules=tuple(ruleset.rules))
