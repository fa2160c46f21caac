"""Tests for tree-path and association-rule mining."""

import itertools

import numpy as np
import pytest

from rulefeat.altminers import (
    default_min_leaf,
    frequent_itemsets,
    mine_assoc_rules,
    mine_tree_rules,
    minority_share,
    tree_path_rules,
)
from rulefeat.mining import BinnedView, score_rule, select_rules
from rulefeat.preprocess import fit_quantizer
from rulefeat.rules import Rule
from rulefeat.schema import CATEGORICAL, CONTINUOUS, FeatureSchema, FeatureSpec, make_dataset


def continuous_binned(values, labels, n_bins=10):
    schema = FeatureSchema(
        features=(FeatureSpec("x", CONTINUOUS),),
        target_name="y",
        classes=("a", "b"),
    )
    ds = make_dataset(schema, [values], labels)
    return fit_quantizer(ds, n_bins).apply(ds)


def categorical_binned(columns, labels, arities, n_classes=2):
    feats = tuple(
        FeatureSpec(f"f{i}", CATEGORICAL, tuple(str(v) for v in range(k)))
        for i, k in enumerate(arities)
    )
    schema = FeatureSchema(
        features=feats,
        target_name="y",
        classes=tuple(str(c) for c in range(n_classes)),
    )
    return make_dataset(schema, columns, labels, binned=True)


class TestTreeRules:
    def test_perfect_threshold_gives_two_pure_rules(self):
        values = [float(v) for v in range(1, 11)] * 4
        labels = [0 if v <= 5 else 1 for v in range(1, 11)] * 4
        ds = continuous_binned(values, labels)
        ruleset = mine_tree_rules(ds, min_leaf=1)
        assert len(ruleset) == 2
        for rule in ruleset:
            assert rule.stats.p == 1.0

    def test_pure_dataset_single_covering_rule(self):
        schema = FeatureSchema(
            features=(FeatureSpec("c", CATEGORICAL, ("x", "y")),),
            target_name="t",
            classes=("only", "other"),
        )
        ds = make_dataset(schema, [[0, 1, 0, 1]], [0, 0, 0, 0], binned=True)
        ruleset = mine_tree_rules(ds, min_leaf=1)
        assert len(ruleset) == 1
        rule = ruleset.rules[0]
        assert rule.conditions == ()
        assert rule.stats.n == 4

    def test_min_leaf_formula(self):
        labels = np.array([0] * 402 + [1] * 35)  # 437 samples, minority 0.08
        ds = categorical_binned(
            [np.zeros(437, dtype=int)], labels, arities=[2], n_classes=2
        )
        assert minority_share(labels, 2) == pytest.approx(35 / 437)
        got = default_min_leaf(ds, n_bins=10)
        assert got == pytest.approx(437 / 10 * (35 / 437))
        # the stated arithmetic: 437 / 10 * 0.08 = 3.496, so leaves >= 4
        assert 437 / 10 * 0.08 == pytest.approx(3.496)

    def test_min_leaf_respected_by_every_leaf(self):
        rng = np.random.default_rng(4)
        values = list(rng.uniform(0, 1, 120))
        labels = list((rng.random(120) < 0.4).astype(int))
        ds = continuous_binned(values, labels)
        for path_rule in tree_path_rules(ds, min_leaf=7):
            assert path_rule.leaf_size >= 7

    def test_leaves_partition_training_set(self):
        rng = np.random.default_rng(6)
        values = list(rng.uniform(0, 1, 90))
        labels = list((np.asarray(values) > 0.45).astype(int))
        ds = continuous_binned(values, labels)
        ruleset = mine_tree_rules(ds, min_leaf=3)
        view = BinnedView.from_dataset(ds)
        membership = np.zeros(ds.n, dtype=int)
        total = 0
        for rule in ruleset:
            mask = rule.matches(view.columns)
            membership += mask.astype(int)
            total += int(mask.sum())
        assert total == ds.n
        assert np.all(membership == 1)  # every sample matches exactly one path

    def test_recomputed_support_equals_leaf_size(self):
        rng = np.random.default_rng(9)
        values = list(rng.uniform(0, 1, 80))
        labels = list((rng.random(80) < 0.5).astype(int))
        ds = continuous_binned(values, labels)
        paths = tree_path_rules(ds, min_leaf=4)
        rules = mine_tree_rules(ds, min_leaf=4)
        assert sorted(p.leaf_size for p in paths) == sorted(r.stats.n for r in rules)

    def test_min_leaf_larger_than_n_rejected(self):
        ds = continuous_binned([1.0, 2.0, 3.0, 4.0], [0, 1, 0, 1])
        with pytest.raises(Exception):
            mine_tree_rules(ds, min_leaf=10)


def brute_force_itemsets(transactions, min_support, max_items):
    items = sorted(set(itertools.chain.from_iterable(transactions)))
    out = {}
    for size in range(1, min(len(items), max_items) + 1):
        for combo in itertools.combinations(items, size):
            s = frozenset(combo)
            count = sum(1 for t in transactions if s <= t)
            if count >= min_support:
                out[s] = count
    return out


class TestFrequentItemsets:
    def test_four_transaction_fixture(self):
        transactions = [
            frozenset({"A", "B"}),
            frozenset({"A", "B"}),
            frozenset({"A"}),
            frozenset({"B"}),
        ]
        freq = frequent_itemsets(transactions, min_support=2)
        assert freq == {
            frozenset({"A"}): 3,
            frozenset({"B"}): 3,
            frozenset({"A", "B"}): 2,
        }

    def test_min_support_equal_n_keeps_universal_items(self):
        transactions = [frozenset({"A", "B"}), frozenset({"A"}), frozenset({"A", "C"})]
        freq = frequent_itemsets(transactions, min_support=3)
        assert set(freq) == {frozenset({"A"})}

    def test_matches_powerset_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n_items = int(rng.integers(4, 13))
            items = list(range(n_items))
            transactions = [
                frozenset(v for v in items if rng.random() < 0.4)
                for _ in range(int(rng.integers(8, 30)))
            ]
            min_support = int(rng.integers(1, 6))
            max_items = int(rng.integers(1, 4))
            fast = frequent_itemsets(transactions, min_support, max_items)
            slow = brute_force_itemsets(transactions, min_support, max_items)
            assert fast == slow


class TestAssocRules:
    def _dataset(self):
        rng = np.random.default_rng(23)
        n = 80
        c0 = rng.integers(0, 3, n)
        c1 = rng.integers(0, 2, n)
        labels = np.where((c0 == 1) & (rng.random(n) < 0.9), 0, rng.integers(0, 2, n))
        return categorical_binned([c0, c1], labels, arities=[3, 2])

    def test_antecedents_are_single_values(self):
        ds = self._dataset()
        ruleset = mine_assoc_rules(ds, min_support=5, z_min=1.0)
        assert len(ruleset) > 0
        for rule in ruleset:
            for cond in rule.conditions:
                assert cond.n_levels() == 1

    def test_filter_stage_matches_select_rules(self):
        ds = self._dataset()
        view = BinnedView.from_dataset(ds)
        z_min, threshold = 1.0, 6.0
        ruleset = mine_assoc_rules(
            ds, min_support=1, z_min=z_min, size_thresholds=threshold, max_items=2
        )
        # rebuild every candidate the itemset search can produce and filter
        transactions = [
            frozenset((f, int(ds.column(f)[r])) for f in range(2)) for r in range(ds.n)
        ]
        expect = []
        for itemset in brute_force_itemsets(transactions, 1, 2):
            from rulefeat.altminers import _itemset_to_conditions

            conds = _itemset_to_conditions(itemset, ds)
            for cls in range(2):
                stats = score_rule(conds, cls, view)
                rule = Rule(conditions=conds, target_class=cls, stats=stats)
                expect.extend(select_rules([rule], z_min, threshold))
        assert sorted(r.sort_key() for r in ruleset) == sorted(
            r.sort_key() for r in expect
        )

    def test_no_nesting_prune_applied(self):
        # two category singletons whose union also qualifies would be
        # pruned by the exhaustive miner, never by the itemset miner
        ds = self._dataset()
        ruleset = mine_assoc_rules(ds, min_support=1, z_min=0.5, size_thresholds=1.0)
        keys = {tuple(c.sort_key() for c in r.conditions) for r in ruleset}
        assert len(keys) == len(set(keys))

    def test_max_items_caps_antecedent_length(self):
        ds = self._dataset()
        for rule in mine_assoc_rules(ds, min_support=2, z_min=0.2, max_items=1):
            assert rule.dimension == 1
