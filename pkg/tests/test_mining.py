"""Tests for the exhaustive rule miner."""

import itertools
import math

import numpy as np
import pytest

from rulefeat.mining import (
    BinnedView,
    MiningConfig,
    enumerate_candidates_1d,
    enumerate_candidates_multi,
    mine,
    prune_nested,
    score_rule,
    select_rules,
    size_threshold,
    z_score_value,
)
from rulefeat.rules import CategoryCondition, IntervalCondition, Rule, RuleStats

from reference_miner import brute_conditions, reference_mine


def make_view(columns, kinds, level_values, labels, n_classes):
    return BinnedView(
        columns=tuple(np.asarray(c, dtype=np.int64) for c in columns),
        kinds=tuple(kinds),
        level_values=tuple(np.asarray(v, dtype=np.int64) for v in level_values),
        labels=np.asarray(labels, dtype=np.int64),
        n_classes=n_classes,
    )


class TestEnumeration:
    def test_interval_count_k10(self):
        conds = enumerate_candidates_1d(0, "continuous", range(1, 11))
        assert len(conds) == 55  # k(k+1)/2

    def test_interval_count_k1(self):
        assert len(enumerate_candidates_1d(0, "continuous", [1])) == 1

    def test_category_count_three(self):
        conds = enumerate_candidates_1d(0, "categorical", [0, 1, 2])
        assert len(conds) == 7  # 2^3 - 1

    @pytest.mark.parametrize("k", range(1, 7))
    def test_counts_match_brute_force(self, k):
        levels = list(range(1, k + 1))
        fast_i = enumerate_candidates_1d(0, "continuous", levels)
        fast_c = enumerate_candidates_1d(0, "categorical", levels)
        assert len(fast_i) == k * (k + 1) // 2
        assert len(fast_c) == 2**k - 1
        assert set(c.sort_key() for c in fast_i) == set(
            c.sort_key() for c in brute_conditions(0, "continuous", levels)
        )
        assert set(c.sort_key() for c in fast_c) == set(
            c.sort_key() for c in brute_conditions(0, "categorical", levels)
        )

    def test_multi_cross_product_sizes(self):
        a = enumerate_candidates_1d(0, "continuous", range(1, 11))
        b = enumerate_candidates_1d(1, "continuous", range(1, 11))
        assert len(enumerate_candidates_multi([a, b])) == 55 * 55
        c = enumerate_candidates_1d(0, "continuous", [1, 2])
        d = enumerate_candidates_1d(1, "categorical", [0, 1])
        assert len(enumerate_candidates_multi([c, d])) == 3 * 3

    def test_multi_single_feature_is_1d(self):
        a = enumerate_candidates_1d(0, "continuous", [1, 2, 3])
        assert enumerate_candidates_multi([a]) == [(cond,) for cond in a]


class TestScoring:
    def test_z_formula_fixture(self):
        # sqrt(100) * 0.2 / sqrt(0.5 * 0.7)
        assert z_score_value(100, 0.5, 0.3) == pytest.approx(3.3806, abs=1e-3)

    def test_z_zero_when_p_equals_p0(self):
        assert z_score_value(50, 0.3, 0.3) == 0.0

    def test_z_unscorable_when_p_zero(self):
        assert z_score_value(50, 0.0, 0.3) == float("-inf")

    def test_population_denominator_variant(self):
        z = z_score_value(100, 0.5, 0.3, denominator="population")
        assert z == pytest.approx(10 * 0.2 / math.sqrt(0.21), abs=1e-9)

    def test_full_domain_rule_scores_zero(self):
        view = make_view(
            [[1, 1, 2, 2]], ["continuous"], [[1, 2]], [0, 1, 0, 1], 2
        )
        stats = score_rule((IntervalCondition(0, 1, 2),), 0, view)
        assert stats.n == 4 and stats.p == stats.p0 and stats.z == 0.0

    def test_score_by_membership_counting(self):
        view = make_view(
            [[1, 2, 3, 1], [0, 0, 1, 1]],
            ["continuous", "categorical"],
            [[1, 2, 3], [0, 1]],
            [0, 0, 1, 1],
            2,
        )
        conds = (IntervalCondition(0, 1, 2), CategoryCondition(1, frozenset([0])))
        stats = score_rule(conds, 0, view)
        assert stats.n == 2 and stats.class_count == 2
        assert stats.p == 1.0 and stats.p0 == 0.5

    def test_zero_support_flagged(self):
        view = make_view([[1, 1]], ["continuous"], [[1, 2]], [0, 1], 2)
        stats = score_rule((IntervalCondition(0, 2, 2),), 0, view)
        assert stats.n == 0 and stats.z == float("-inf")


class TestThresholdAndSelection:
    def test_size_threshold_formula(self):
        assert size_threshold(398, 10, 0.37) == pytest.approx(14.726)
        assert size_threshold(100, 10, 1.0) == 10.0
        assert size_threshold(50, 10, 0.0) == 0.0

    def _rule(self, z, class_count, lo=1, hi=2):
        return Rule(
            conditions=(IntervalCondition(0, lo, hi),),
            target_class=0,
            stats=RuleStats(n=class_count + 3, class_count=class_count,
                            p=0.5, p0=0.3, z=z),
        )

    def test_select_keeps_qualifying(self):
        kept = select_rules([self._rule(2.5, 20)], 1.96, 14.72)
        assert len(kept) == 1

    def test_select_rejects_small_class_count(self):
        kept = select_rules([self._rule(3.0, 14)], 1.96, 14.72)
        assert kept == []

    def test_select_empty_input(self):
        assert select_rules([], 1.96, 1.0) == []

    def test_select_monotone_in_both_thresholds(self):
        rng = np.random.default_rng(11)
        rules = [
            self._rule(float(rng.uniform(0, 5)), int(rng.integers(1, 40)), lo, hi)
            for lo in range(1, 5)
            for hi in range(lo, 5)
        ]
        base = set(r.sort_key() for r in select_rules(rules, 1.5, 5))
        tighter_z = set(r.sort_key() for r in select_rules(rules, 2.5, 5))
        tighter_n = set(r.sort_key() for r in select_rules(rules, 1.5, 15))
        assert tighter_z <= base and tighter_n <= base


class TestPruning:
    def _rule(self, lo, hi, z):
        return Rule(
            conditions=(IntervalCondition(0, lo, hi),),
            target_class=0,
            stats=RuleStats(n=10, class_count=5, p=0.5, p0=0.3, z=z),
        )

    def test_inner_removed_when_outer_at_least_as_good(self):
        inner, outer = self._rule(2, 3, 3.0), self._rule(2, 5, 4.0)
        kept = prune_nested([inner, outer])
        assert kept == [outer]

    def test_outer_removed_when_inner_strictly_better(self):
        inner, outer = self._rule(2, 3, 4.0), self._rule(2, 5, 3.0)
        kept = prune_nested([inner, outer])
        assert kept == [inner]

    def test_disjoint_rules_both_kept(self):
        a, b = self._rule(1, 2, 3.0), self._rule(4, 5, 2.5)
        assert len(prune_nested([a, b])) == 2

    def test_z_tie_keeps_larger_rule(self):
        inner, outer = self._rule(2, 3, 3.0), self._rule(1, 4, 3.0)
        assert prune_nested([inner, outer]) == [outer]

    def test_categorical_keeps_better_inner_and_outer(self):
        # without the covering-rule pass, a categorical outer survives a
        # strictly better inner rule
        def crule(cats, z):
            return Rule(
                conditions=(CategoryCondition(0, frozenset(cats)),),
                target_class=0,
                stats=RuleStats(n=10, class_count=5, p=0.5, p0=0.3, z=z),
            )

        inner, outer = crule({1}, 4.0), crule({1, 2}, 3.0)
        kept = prune_nested([inner, outer])
        assert sorted(r.sort_key() for r in kept) == sorted(
            r.sort_key() for r in [inner, outer]
        )

    def test_continuous_survivors_pairwise_non_nested(self):
        rng = np.random.default_rng(5)
        rules = []
        for lo in range(1, 6):
            for hi in range(lo, 6):
                rules.append(self._rule(lo, hi, float(rng.uniform(1, 5))))
        kept = prune_nested(rules)
        for a, b in itertools.combinations(kept, 2):
            assert not a.nested_in(b) and not b.nested_in(a)


def random_instance(rng):
    n_features = int(rng.integers(1, 4))
    kinds = [str(rng.choice(["continuous", "categorical"])) for _ in range(n_features)]
    level_values = []
    for kind in kinds:
        k = int(rng.integers(2, 5))
        level_values.append(list(range(1, k + 1)) if kind == "continuous" else list(range(k)))
    n = int(rng.integers(10, 61))
    n_classes = int(rng.integers(2, 4))
    columns = [rng.choice(lv, size=n) for lv in level_values]
    labels = rng.integers(0, n_classes, size=n)
    # bias labels toward a feature so that some rules clear the gate
    if rng.random() < 0.7:
        f = int(rng.integers(0, n_features))
        hot = columns[f] <= np.median(columns[f])
        labels = np.where(hot & (rng.random(n) < 0.7), 0, labels)
    config = MiningConfig(
        max_dimension=int(rng.integers(1, 3)) if n_features > 1 else 1,
        z_min=float(rng.choice([0.8, 1.5, 1.96])),
        threshold_bins=int(rng.integers(2, 11)),
    )
    return columns, kinds, level_values, labels, n_classes, config


def as_comparable(ruleset):
    out = []
    for r in ruleset:
        out.append(
            (
                r.target_class,
                tuple((c.feature, c.sort_key()) for c in r.conditions),
                r.stats.n,
                r.stats.class_count,
                round(r.stats.z, 9),
            )
        )
    return sorted(out)


class TestMine:
    def test_matches_reference_on_50_random_instances(self):
        rng = np.random.default_rng(20240)
        for trial in range(50):
            columns, kinds, level_values, labels, n_classes, config = random_instance(rng)
            view = make_view(columns, kinds, level_values, labels, n_classes)
            fast = mine(view, config)
            slow = reference_mine(
                rows=list(zip(*[list(c) for c in columns])),
                labels=list(labels),
                kinds=kinds,
                level_values=level_values,
                n_classes=n_classes,
                max_dimension=config.max_dimension,
                z_min=config.z_min,
                threshold_bins=config.threshold_bins,
            )
            assert as_comparable(fast) == as_comparable(slow), f"trial {trial}"

    def test_perfectly_separating_binary_feature(self):
        # one binary feature fully determines the label
        col = [0] * 20 + [1] * 20
        labels = [0] * 20 + [1] * 20
        view = make_view([col], ["categorical"], [[0, 1]], labels, 2)
        ruleset = mine(view, MiningConfig(threshold_bins=10))
        assert len(ruleset) == 2
        for rule in ruleset:
            assert rule.stats.p == 1.0
            assert rule.conditions[0].categories == frozenset([rule.target_class])

    def test_uninformative_features_give_empty_ruleset(self):
        # identical label mix in every bin -> z = 0 everywhere
        col = [1, 1, 2, 2, 3, 3] * 4
        labels = [0, 1] * 12
        view = make_view([col], ["continuous"], [[1, 2, 3]], labels, 2)
        assert len(mine(view, MiningConfig())) == 0

    def test_deterministic_across_runs(self):
        rng = np.random.default_rng(77)
        columns, kinds, level_values, labels, n_classes, config = random_instance(rng)
        view = make_view(columns, kinds, level_values, labels, n_classes)
        assert as_comparable(mine(view, config)) == as_comparable(mine(view, config))

    def test_selected_rules_recheck_thresholds(self):
        rng = np.random.default_rng(99)
        for _ in range(10):
            columns, kinds, level_values, labels, n_classes, config = random_instance(rng)
            view = make_view(columns, kinds, level_values, labels, n_classes)
            thresholds = [
                size_threshold(view.n, config.threshold_bins, float(s)) if s > 0 else 0.0
                for s in view.class_shares()
            ]
            for rule in mine(view, config):
                assert rule.stats.z >= config.z_min
                assert rule.stats.class_count >= thresholds[rule.target_class]

    def test_raising_z_min_never_adds_rules(self):
        rng = np.random.default_rng(31)
        for _ in range(15):
            columns, kinds, level_values, labels, n_classes, config = random_instance(rng)
            view = make_view(columns, kinds, level_values, labels, n_classes)
            lo = mine(view, MiningConfig(
                max_dimension=config.max_dimension, z_min=1.0,
                threshold_bins=config.threshold_bins))
            hi = mine(view, MiningConfig(
                max_dimension=config.max_dimension, z_min=2.2,
                threshold_bins=config.threshold_bins))
            assert set(as_comparable(hi)) <= set(as_comparable(lo))
