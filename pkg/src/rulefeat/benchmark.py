"""Benchmark orchestration: repeated stratified splits, inner
cross-validated grid search, and the comparison grid of global, local,
forest, and hybrid strategies.

Strategy families share fitted state: all four classifiers of a miner
family reuse the same split- and fold-level preprocessing, mined rules,
and feature matrices, which keeps results identical to independent runs
while avoiding redundant mining. Every random decision derives from the
master seed and the cell's coordinates, so any execution order (or
process-parallel schedule) produces the same report, byte for byte.
"""

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .altminers import default_min_leaf, mine_assoc_rules, mine_tree_rules
from .config import RunConfig
from .datasets import builtin_dataset
from .errors import DataError
from .features import (
    ENCODING_BINARY,
    ENCODING_DEFAULT,
    DeltaWeights,
    transform,
)
from .io import load_csv, read_schema
from .kernel import train_rbf_svm
from .linear import balanced_class_weights, train_linear_svm, train_logreg
from .metrics import jaccard_stability, model_complexity, weighted_f1
from .mining import MiningConfig, mine
from .preprocess import fit_imputer, fit_quantizer, one_hot
from .rules import RuleSet, describe_conditions, dump_ruleset
from .schema import Dataset
from .seeding import derive_seed
from .splits import stratified_folds, stratified_split
from .trees import ForestModel, train_rf


def load_dataset(ref, config: RunConfig) -> Dataset:
    if ref.source == "builtin":
        return builtin_dataset(ref.name, seed=derive_seed(config.seed, "data", ref.name))
    schema = read_schema(ref.schema_path)
    return load_csv(ref.data_path, schema, config.missing_token)


@dataclass
class PreparedState:
    """Everything fitted on one training set for one miner family."""

    family: str
    imputer: object
    binmap: object
    ruleset: Optional[RuleSet]
    weights: Optional[DeltaWeights]
    X: np.ndarray
    labels: np.ndarray
    n_columns: int
    n_classes: int
    class_weights: np.ndarray


class PipelineFactory:
    """Builds fitted states and classifiers for one strategy family."""

    def __init__(self, family: str, config: RunConfig, n_classes: int):
        self.family = family
        self.config = config
        self.n_classes = n_classes
        self.mining_config = MiningConfig(
            max_dimension=config.max_dimension,
            z_min=config.z_min,
            threshold_bins=config.bins,
            z_denominator=config.z_denominator,
        )

    def prepare(self, train: Dataset) -> PreparedState:
        imputer = fit_imputer(train)
        imputed = imputer.apply(train)
        binmap = fit_quantizer(imputed, self.config.bins)
        binned = binmap.apply(imputed)
        ruleset = None
        weights = None
        if self.family == "global":
            X = one_hot(binned)
        elif self.family == "rm1d":
            ruleset = mine(binned, self.mining_config)
            weights = DeltaWeights.fit(ruleset, imputed)
            X = transform(imputed, ruleset, binmap, weights, ENCODING_DEFAULT).values
        elif self.family == "rmdt":
            ruleset = mine_tree_rules(
                binned, min_leaf=default_min_leaf(binned, self.config.bins)
            )
            X = transform(imputed, ruleset, binmap, encoding=ENCODING_BINARY).values
        elif self.family == "rmar":
            ruleset = mine_assoc_rules(
                binned,
                z_min=self.config.z_min,
                threshold_bins=self.config.bins,
                max_items=self.config.rmar_max_items,
            )
            X = transform(imputed, ruleset, binmap, encoding=ENCODING_BINARY).values
        else:
            raise DataError(f"unknown strategy family {self.family!r}")
        n_columns = X.shape[1]
        if n_columns == 0:
            X = np.zeros((train.n, 1))  # degenerate: intercept-only models
        return PreparedState(
            family=self.family,
            imputer=imputer,
            binmap=binmap,
            ruleset=ruleset,
            weights=weights,
            X=X,
            labels=train.labels,
            n_columns=n_columns,
            n_classes=self.n_classes,
            class_weights=balanced_class_weights(train.labels, self.n_classes),
        )

    def restrict(self, state: PreparedState, subset: Dataset) -> PreparedState:
        """Reuse fitted artifacts on a subset (cheap inner-CV variant)."""
        X = self.featurize(state, subset)
        return PreparedState(
            family=state.family,
            imputer=state.imputer,
            binmap=state.binmap,
            ruleset=state.ruleset,
            weights=state.weights,
            X=X,
            labels=subset.labels,
            n_columns=state.n_columns,
            n_classes=state.n_classes,
            class_weights=balanced_class_weights(subset.labels, state.n_classes),
        )

    def featurize(self, state: PreparedState, ds: Dataset) -> np.ndarray:
        imputed = state.imputer.apply(ds)
        if self.family == "global":
            X = one_hot(state.binmap.apply(imputed))
        elif self.family == "rm1d":
            X = transform(
                imputed, state.ruleset, state.binmap, state.weights, ENCODING_DEFAULT
            ).values
        else:
            X = transform(
                imputed, state.ruleset, state.binmap, encoding=ENCODING_BINARY
            ).values
        if X.shape[1] == 0:
            X = np.zeros((ds.n, 1))
        return X

    def fit(self, state: PreparedState, clf: str, hyper: float, seed: int):
        if clf == "l2lr":
            return train_logreg(
                state.X, state.labels, "l2", hyper, state.class_weights, n_classes=state.n_classes
            )
        if clf == "l1lr":
            return train_logreg(
                state.X, state.labels, "l1", hyper, state.class_weights, n_classes=state.n_classes
            )
        if clf == "svmlin":
            return train_linear_svm(
                state.X,
                state.labels,
                hyper,
                state.class_weights,
                seed=seed,
                n_classes=state.n_classes,
            )
        if clf == "svmrbf":
            return train_rbf_svm(
                state.X, state.labels, hyper, class_weights=state.class_weights,
                n_classes=state.n_classes,
            )
        if clf == "rf":
            return train_rf(
                state.X,
                state.labels,
                n_trees=int(hyper),
                min_leaf=self.config.rf_min_leaf,
                seed=seed,
                class_weights=state.class_weights,
                n_classes=state.n_classes,
            )
        raise DataError(f"unknown classifier {clf!r}")

    def fit_grid(self, state: PreparedState, clf: str, grid, seed: int) -> list:
        """Models for every grid value.

        Forests are trained once at the largest tree count; because tree
        t depends only on (seed, t), each smaller count is exactly the
        prefix of that forest.
        """
        if clf == "rf":
            full = self.fit(state, clf, max(grid), seed)
            out = []
            for g in grid:
                out.append(
                    (
                        g,
                        ForestModel(
                            trees=full.trees[: int(g)],
                            n_classes=full.n_classes,
                            n_features=full.n_features,
                            n_trees=int(g),
                            seed=full.seed,
                        ),
                    )
                )
            return out
        return [(g, self.fit(state, clf, g, seed)) for g in grid]


def grid_search(
    factory: PipelineFactory,
    train: Dataset,
    clf: str,
    grid,
    k_folds: int = 5,
    seed: int = 0,
    fold_states: Optional[list] = None,
):
    """Mean inner-CV weighted F1 per grid value; returns the maximizer.

    Rule mining and all preprocessing run inside each fold (on the
    fold-train part only) unless precomputed fold states are supplied.
    Ties resolve to the earliest grid entry.
    """
    folds = stratified_folds(train.labels, k_folds, seed)
    if fold_states is None:
        fold_states = [factory.prepare(train.take(tr)) for tr, _ in folds]
    grid = list(grid)
    scores = np.zeros(len(grid))
    for fold_i, ((tr, va), state) in enumerate(zip(folds, fold_states)):
        fold_val = train.take(va)
        X_val = factory.featurize(state, fold_val)
        fit_seed = derive_seed(seed, "grid", clf, fold_i)
        for gi, (hyper, model) in enumerate(factory.fit_grid(state, clf, grid, fit_seed)):
            pred = model.predict(X_val)
            scores[gi] += weighted_f1(fold_val.labels, pred, state.n_classes)
    scores /= len(folds)
    best = int(np.argmax(scores))
    return grid[best], scores


@dataclass
class BenchmarkReport:
    """All raw benchmark outputs, ready for serialization."""

    rows: list = field(default_factory=list)  # per (dataset, strategy, split)
    errors: list = field(default_factory=list)
    stability: list = field(default_factory=list)
    rule_reports: list = field(default_factory=list)
    rulesets: dict = field(default_factory=dict)  # (dataset, family, split) -> text
    seed: int = 0
    config_hash: str = ""

    def summary(self) -> list:
        """Mean/std/median aggregates per (dataset, strategy)."""
        grouped: dict = {}
        for row in self.rows:
            grouped.setdefault((row["dataset"], row["strategy"]), []).append(row)
        out = []
        for (dataset, strategy), rows in sorted(grouped.items()):
            f1s = np.array([r["f1"] for r in rows])
            std = float(f1s.std())
            out.append(
                {
                    "dataset": dataset,
                    "strategy": strategy,
                    "mean_f1": float(f1s.mean()),
                    "std_f1": std,
                    "mean_over_std": float(f1s.mean() / std) if std > 0 else float("inf"),
                    "median_complexity": float(np.median([r["complexity"] for r in rows])),
                    "n_splits": len(rows),
                }
            )
        return out


def _run_family(ds: Dataset, ds_name: str, family: str, strategies, config: RunConfig):
    """All split records for one (dataset, family) group."""
    rows, errors, rule_rows, stability_rows, rulesets = [], [], [], [], {}
    factory = PipelineFactory(family, config, ds.schema.n_classes)
    plan = stratified_split(
        ds, config.test_fraction, config.n_splits, derive_seed(config.seed, "splits", ds_name)
    )
    split_states = []
    try:
        per_split = []
        for split_i, (tr, te) in enumerate(plan):
            train, test = ds.take(tr), ds.take(te)
            state = factory.prepare(train)
            folds_seed = derive_seed(config.seed, "folds", ds_name, split_i)
            folds = stratified_folds(train.labels, config.inner_folds, folds_seed)
            if config.mine_once_per_split:
                fold_states = [factory.restrict(state, train.take(ftr)) for ftr, _ in folds]
            else:
                fold_states = [factory.prepare(train.take(ftr)) for ftr, _ in folds]
            per_split.append((split_i, train, test, state, folds_seed, fold_states))
            split_states.append(state)
    except Exception as exc:  # recorded per cell, never silently dropped
        for strategy in strategies:
            errors.append({"dataset": ds_name, "strategy": strategy, "error": str(exc)})
        return rows, errors, rule_rows, stability_rows, rulesets

    for strategy in strategies:
        clf = "rf" if strategy == "rf" else strategy.split("-", 1)[1]
        grid = config.trees_grid if clf == "rf" else config.c_grid
        try:
            for split_i, train, test, state, folds_seed, fold_states in per_split:
                best, _ = grid_search(
                    factory,
                    train,
                    clf,
                    grid,
                    k_folds=config.inner_folds,
                    seed=folds_seed,
                    fold_states=fold_states,
                )
                final_seed = derive_seed(
                    config.seed, "final", ds_name, strategy, split_i
                )
                model = factory.fit(state, clf, best, final_seed)
                X_test = factory.featurize(state, test)
                pred = model.predict(X_test)
                rows.append(
                    {
                        "dataset": ds_name,
                        "strategy": strategy,
                        "split": split_i,
                        "best_hyper": float(best),
                        "f1": weighted_f1(test.labels, pred, state.n_classes),
                        "complexity": model_complexity(model, state.n_columns),
                    }
                )
        except Exception as exc:
            rows = [r for r in rows if r["strategy"] != strategy]
            errors.append({"dataset": ds_name, "strategy": strategy, "error": str(exc)})

    if family != "global" and split_states and all(s.ruleset is not None for s in split_states):
        schema = ds.schema
        for split_i, state in enumerate(split_states):
            rulesets[(ds_name, family, split_i)] = dump_ruleset(state.ruleset, schema)
        sets = [s.ruleset.tuple_set() for s in split_states]
        if len(sets) >= 2:
            mean, std, _ = jaccard_stability(sets)
            stability_rows.append(
                {"dataset": ds_name, "miner": family, "mean": mean, "std": std}
            )
        rule_rows.extend(_aggregate_rules(ds_name, family, [s.ruleset for s in split_states], schema))
    return rows, errors, rule_rows, stability_rows, rulesets


def _aggregate_rules(ds_name, family, rulesets, schema) -> list:
    """Per-rule selection frequency over splits and mean z-score."""
    seen: dict = {}
    for ruleset in rulesets:
        for rule in ruleset:
            entry = seen.setdefault(rule.identity(), {"rule": rule, "zs": [], "count": 0})
            entry["count"] += 1
            entry["zs"].append(rule.stats.z)
    out = []
    for key in sorted(seen, key=lambda k: seen[k]["rule"].sort_key()):
        entry = seen[key]
        rule = entry["rule"]
        out.append(
            {
                "dataset": ds_name,
                "miner": family,
                "class": schema.classes[rule.target_class],
                "conditions": describe_conditions(rule, schema),
                "frequency": entry["count"] / len(rulesets),
                "mean_z": float(np.mean(entry["zs"])),
            }
        )
    return out


def _family_task(args):
    config, ref, family, strategies = args
    ds = load_dataset(ref, config)
    return _run_family(ds, ref.name, family, strategies, config)


def run_benchmark(config: RunConfig, config_hash_value: str = "", jobs: int = 1) -> BenchmarkReport:
    """Execute every configured (dataset, strategy) cell."""
    report = BenchmarkReport(seed=config.seed, config_hash=config_hash_value)
    families = config.strategy_families()
    tasks = []
    for ref in config.datasets:
        for family in sorted(families):
            strategies = sorted(families[family])
            tasks.append((config, ref, family, strategies))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_family_task, tasks))
    else:
        results = [_family_task(t) for t in tasks]
    for rows, errors, rule_rows, stability_rows, rulesets in results:
        report.rows.extend(rows)
        report.errors.extend(errors)
        report.rule_reports.extend(rule_rows)
        report.stability.extend(stability_rows)
        report.rulesets.update(rulesets)
    report.rows.sort(key=lambda r: (r["dataset"], r["strategy"], r["split"]))
    report.errors.sort(key=lambda r: (r["dataset"], r["strategy"]))
    report.stability.sort(key=lambda r: (r["dataset"], r["miner"]))
    report.rule_reports.sort(
        key=lambda r: (r["dataset"], r["miner"], r["class"], r["conditions"])
    )
    return report


def _write_csv(path, fieldnames, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_report(report: BenchmarkReport, out_dir) -> list:
    """Persist all raw artifacts; returns the list of files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "f1_scores.csv"
    _write_csv(
        path,
        ["dataset", "strategy", "split", "best_hyper", "f1", "complexity"],
        [{k: _fmt(v) for k, v in row.items()} for row in report.rows],
    )
    written.append(path)

    path = out / "summary.csv"
    _write_csv(
        path,
        ["dataset", "strategy", "mean_f1", "std_f1", "mean_over_std", "median_complexity", "n_splits"],
        [{k: _fmt(v) for k, v in row.items()} for row in report.summary()],
    )
    written.append(path)

    path = out / "stability.csv"
    _write_csv(
        path,
        ["dataset", "miner", "mean", "std"],
        [{k: _fmt(v) for k, v in row.items()} for row in report.stability],
    )
    written.append(path)

    path = out / "errors.csv"
    _write_csv(path, ["dataset", "strategy", "error"], report.errors)
    written.append(path)

    path = out / "rule_report.jsonl"
    with open(path, "w") as fh:
        for row in report.rule_reports:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    written.append(path)

    rules_dir = out / "rules"
    rules_dir.mkdir(exist_ok=True)
    for (ds_name, family, split_i), text in sorted(report.rulesets.items()):
        path = rules_dir / f"{ds_name}__{family}__split{split_i}.rules"
        path.write_text(text)
        written.append(path)

    path = out / "run_manifest.txt"
    path.write_text(
        "\n".join(
            [
                f"master_seed {report.seed}",
                f"config_hash {report.config_hash}",
                f"rulefeat_version {__version__}",
                f"numpy_version {np.__version__}",
            ]
        )
        + "\n"
    )
    written.append(path)
    return [str(p) for p in written]


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v
