"""Rules, their quality statistics, and rule-set serialization.

A rule is a conjunction of per-feature conditions tied to one target
class. Conditions on binned continuous features are inclusive bin
intervals; conditions on categorical features are non-empty category
sets. Rule sets serialize to line-delimited JSON records that round-trip
bit-exactly (floats are emitted with full repr precision).
"""

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import DataError
from .schema import CATEGORICAL, FeatureSchema


@dataclass(frozen=True)
class IntervalCondition:
    """Contiguous range of bin indices, inclusive on both ends."""

    feature: int
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise DataError("interval lower bound exceeds upper bound")

    def matches(self, column: np.ndarray) -> np.ndarray:
        return (column >= self.lo) & (column <= self.hi)

    def levels(self) -> frozenset:
        return frozenset(range(self.lo, self.hi + 1))

    def contains(self, other: "IntervalCondition") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def sort_key(self):
        return (self.lo, self.hi)

    def n_levels(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class CategoryCondition:
    """Non-empty set of category indices."""

    feature: int
    categories: frozenset

    def __post_init__(self):
        if not self.categories:
            raise DataError("category set is empty")

    def matches(self, column: np.ndarray) -> np.ndarray:
        return np.isin(column, sorted(self.categories))

    def levels(self) -> frozenset:
        return frozenset(self.categories)

    def contains(self, other: "CategoryCondition") -> bool:
        return other.categories <= self.categories

    def sort_key(self):
        return (len(self.categories), tuple(sorted(self.categories)))

    def n_levels(self) -> int:
        return len(self.categories)


@dataclass(frozen=True)
class RuleStats:
    """Support and over-concentration statistics of one rule.

    n is the number of samples satisfying the rule, class_count how many
    of them carry the target class, p their ratio, p0 the target class's
    share of the whole mining population, and z the over-concentration
    score. Rules with empty support or p = 0 are unscorable and carry
    z = -inf so they can never be selected.
    """

    n: int
    class_count: int
    p: float
    p0: float
    z: float


@dataclass(frozen=True)
class Rule:
    """Conjunction of conditions on distinct features, plus its stats.

    Tree-path extraction may legitimately produce an unconditioned rule
    (a tree that never split), so an empty condition tuple is allowed and
    matches every sample; the exhaustive miner itself never emits one.
    """

    conditions: tuple
    target_class: int
    stats: Optional[RuleStats] = field(default=None, compare=False)

    def __post_init__(self):
        feats = [c.feature for c in self.conditions]
        if len(set(feats)) != len(feats):
            raise DataError("rule has two conditions on the same feature")
        if list(feats) != sorted(feats):
            object.__setattr__(
                self, "conditions", tuple(sorted(self.conditions, key=lambda c: c.feature))
            )

    @property
    def features(self) -> tuple:
        return tuple(c.feature for c in self.conditions)

    @property
    def dimension(self) -> int:
        return len(self.conditions)

    def matches(self, columns) -> np.ndarray:
        """Boolean membership mask given per-feature level columns."""
        if not self.conditions:
            n = len(columns[0]) if len(columns) else 0
            return np.ones(n, dtype=bool)
        mask = self.conditions[0].matches(columns[self.conditions[0].feature])
        for cond in self.conditions[1:]:
            mask &= cond.matches(columns[cond.feature])
        return mask

    def identity(self):
        """Hashable key ignoring stats; used to match rules across splits."""
        return (self.target_class, tuple((c.feature, c.sort_key()) for c in self.conditions))

    def sort_key(self):
        return (self.target_class, self.features, tuple(c.sort_key() for c in self.conditions))

    def nested_in(self, other: "Rule") -> bool:
        """True when this rule's region is strictly inside ``other``'s.

        Defined only between rules on the identical feature set; anything
        else is not comparable and returns False.
        """
        if self.features != other.features:
            return False
        if all(o.contains(s) for s, o in zip(self.conditions, other.conditions)):
            return self.conditions != other.conditions
        return False


class RuleSet:
    """Canonically ordered collection of rules grouped by target class."""

    def __init__(self, rules: Iterable[Rule], n_classes: int):
        self.n_classes = n_classes
        self.rules = tuple(sorted(rules, key=Rule.sort_key))

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RuleSet)
            and self.n_classes == other.n_classes
            and self.rules == other.rules
        )

    def for_class(self, c: int) -> tuple:
        return tuple(r for r in self.rules if r.target_class == c)

    def classes_present(self) -> tuple:
        return tuple(sorted({r.target_class for r in self.rules}))

    def tuple_set(self) -> frozenset:
        """All (feature, level) pairs covered by any rule in the set."""
        pairs = set()
        for rule in self.rules:
            for cond in rule.conditions:
                for level in cond.levels():
                    pairs.add((cond.feature, int(level)))
        return frozenset(pairs)


def _condition_to_record(cond, schema: FeatureSchema) -> dict:
    spec = schema.features[cond.feature]
    if isinstance(cond, IntervalCondition):
        return {"feature": spec.name, "interval": [int(cond.lo), int(cond.hi)]}
    return {
        "feature": spec.name,
        "categories": [spec.categories[i] for i in sorted(cond.categories)],
    }


def _condition_from_record(rec: dict, schema: FeatureSchema):
    idx = schema.feature_index(rec["feature"])
    if "interval" in rec:
        lo, hi = rec["interval"]
        return IntervalCondition(idx, int(lo), int(hi))
    spec = schema.features[idx]
    if spec.kind != CATEGORICAL:
        raise DataError(f"category condition on continuous feature {spec.name!r}")
    cat_index = {c: i for i, c in enumerate(spec.categories)}
    try:
        cats = frozenset(cat_index[c] for c in rec["categories"])
    except KeyError as exc:
        raise DataError(f"unknown category {exc.args[0]!r} for {spec.name!r}") from None
    return CategoryCondition(idx, cats)


def describe_conditions(rule: Rule, schema: FeatureSchema) -> str:
    """Human-readable conjunction like 'size in bins [2, 5]; color in {red}'."""
    parts = []
    for cond in rule.conditions:
        spec = schema.features[cond.feature]
        if isinstance(cond, IntervalCondition):
            parts.append(f"{spec.name} in bins [{cond.lo}, {cond.hi}]")
        else:
            cats = ",".join(spec.categories[i] for i in sorted(cond.categories))
            parts.append(f"{spec.name} in {{{cats}}}")
    return "; ".join(parts) if parts else "(always true)"


def rule_to_record(rule: Rule, schema: FeatureSchema) -> dict:
    record = {
        "class": schema.classes[rule.target_class],
        "conditions": [_condition_to_record(c, schema) for c in rule.conditions],
    }
    if rule.stats is not None:
        record.update(
            n=int(rule.stats.n),
            class_count=int(rule.stats.class_count),
            p=rule.stats.p,
            p0=rule.stats.p0,
            z=rule.stats.z,
        )
    return record


def rule_from_record(record: dict, schema: FeatureSchema) -> Rule:
    try:
        target = schema.classes.index(record["class"])
    except ValueError:
        raise DataError(f"unknown class label {record['class']!r}") from None
    conditions = tuple(_condition_from_record(c, schema) for c in record["conditions"])
    stats = None
    if "n" in record:
        stats = RuleStats(
            n=int(record["n"]),
            class_count=int(record["class_count"]),
            p=float(record["p"]),
            p0=float(record["p0"]),
            z=float(record["z"]),
        )
    return Rule(conditions=conditions, target_class=target, stats=stats)


def dump_ruleset(ruleset: RuleSet, schema: FeatureSchema) -> str:
    """Serialize to line-delimited JSON, one record per rule."""
    lines = [
        json.dumps(rule_to_record(rule, schema), sort_keys=True) for rule in ruleset.rules
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def load_ruleset(text: str, schema: FeatureSchema) -> RuleSet:
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"rule record {lineno}: invalid JSON: {exc}") from None
        rules.append(rule_from_record(record, schema))
    return RuleSet(rules, n_classes=schema.n_classes)
