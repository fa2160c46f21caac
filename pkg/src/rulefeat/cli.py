"""Command-line entry point.

Subcommands front the library operations: `fetch` (manifest downloads),
`synth` (synthetic dataset generation), `mine` (rule extraction),
`transform` (local feature matrices), `train` (single classifiers),
`benchmark` (the full comparison protocol), and `report` (pivot tables
from persisted benchmark artifacts).

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
error. Every command appends one JSON line describing its outputs to
run_log.jsonl next to its artifacts.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .altminers import mine_assoc_rules, mine_tree_rules
from .benchmark import run_benchmark, write_report
from .config import config_hash, load_config
from .errors import ConfigError, DataError, RulefeatError
from .features import (
    ENCODING_BINARY,
    ENCODING_DEFAULT,
    DeltaWeights,
    transform,
)
from .fetch import fetch_datasets
from .io import load_csv, read_schema, write_csv, write_schema
from .kernel import train_rbf_svm
from .linear import balanced_class_weights, train_linear_svm, train_logreg
from .mining import MiningConfig, mine
from .models import dump_model
from .preprocess import BinMap, Imputer, fit_imputer, fit_quantizer
from .report import write_tables
from .rules import describe_conditions, dump_ruleset, load_ruleset
from .synthetic import generate_synthetic
from .trees import train_cart, train_rf

CACHE_ENV = "RULEFEAT_CACHE_DIR"

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def _log_line(out_path: Path, command: str, params: dict, outputs: list) -> None:
    log = out_path / "run_log.jsonl"
    entry = {
        "command": command,
        "params": params,
        "outputs": [str(o) for o in outputs],
        "status": "ok",
    }
    with open(log, "a") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")


def cmd_fetch(args) -> int:
    cache = args.cache or os.environ.get(CACHE_ENV) or "cache"
    results = fetch_datasets(args.manifest, cache)
    for r in results:
        print(f"{r.name}\t{r.status}\t{r.path}")
    _log_line(
        Path(cache),
        "fetch",
        {"manifest": args.manifest, "cache": str(cache)},
        [r.path for r in results],
    )
    return 0


def cmd_synth(args) -> int:
    ds = generate_synthetic(args.n, args.noise, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(ds, out)
    schema_path = out.with_suffix(".schema")
    write_schema(ds.schema, schema_path)
    _log_line(
        out.parent,
        "synth",
        {"n": args.n, "noise": args.noise, "seed": args.seed},
        [out, schema_path],
    )
    return 0


def _load_and_prepare(args):
    schema = read_schema(args.schema)
    ds = load_csv(args.data, schema, args.missing_token)
    imputer = fit_imputer(ds)
    imputed = imputer.apply(ds)
    binmap = fit_quantizer(imputed, args.bins)
    return ds, imputed, imputer, binmap


def cmd_mine(args) -> int:
    _, imputed, imputer, binmap = _load_and_prepare(args)
    binned = binmap.apply(imputed)
    if args.miner == "rm":
        cfg = MiningConfig(
            max_dimension=args.dimension,
            z_min=args.z_min,
            threshold_bins=args.bins,
            z_denominator=args.z_denominator,
        )
        ruleset = mine(binned, cfg)
    elif args.miner == "dt":
        ruleset = mine_tree_rules(binned)
    else:
        ruleset = mine_assoc_rules(binned, z_min=args.z_min, threshold_bins=args.bins)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dump_ruleset(ruleset, imputed.schema))
    prep = {
        "imputer": imputer.to_dict(),
        "binmap": binmap.to_dict(),
        "weights": DeltaWeights.fit(ruleset, imputed).to_dict() if len(ruleset) else None,
    }
    prep_path = Path(str(out) + ".prep")
    prep_path.write_text(json.dumps(prep, sort_keys=True))
    print(f"mined {len(ruleset)} rules -> {out}")
    _log_line(
        out.parent,
        "mine",
        {"data": args.data, "miner": args.miner, "bins": args.bins, "z_min": args.z_min},
        [out, prep_path],
    )
    return 0


def cmd_transform(args) -> int:
    schema = read_schema(args.schema)
    ds = load_csv(args.data, schema, args.missing_token)
    ruleset = load_ruleset(Path(args.rules).read_text(), schema)
    prep_path = args.prep or str(args.rules) + ".prep"
    try:
        prep = json.loads(Path(prep_path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read prep sidecar {prep_path}: {exc}") from exc
    imputer = Imputer.from_dict(prep["imputer"])
    binmap = BinMap.from_dict(prep["binmap"])
    weights = (
        DeltaWeights.from_dict(prep["weights"]) if prep.get("weights") else None
    )
    imputed = imputer.apply(ds)
    matrix = transform(imputed, ruleset, binmap, weights, args.encoding)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        for i, rule in enumerate(matrix.rules):
            fh.write(
                f"# column {i}: class={schema.classes[rule.target_class]}"
                f" rule={describe_conditions(rule, schema)} z={rule.stats.z!r}\n"
            )
        header = ",".join(f"rule_{i}" for i in range(matrix.n_columns))
        fh.write(header + "\n")
        for row in matrix.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    labels_path = Path(str(out) + ".labels")
    labels_path.write_text(
        "\n".join(schema.classes[i] for i in ds.labels) + "\n"
    )
    _log_line(
        out.parent,
        "transform",
        {"data": args.data, "rules": args.rules, "encoding": args.encoding},
        [out, labels_path],
    )
    return 0


def _read_feature_csv(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("rule_"):
                continue
            if line.strip():
                rows.append([float(v) for v in line.strip().split(",")])
    if not rows:
        raise DataError(f"{path}: no feature rows")
    return np.asarray(rows)


def cmd_train(args) -> int:
    X = _read_feature_csv(args.features)
    label_names = [
        line.strip() for line in Path(args.labels).read_text().splitlines() if line.strip()
    ]
    classes = sorted(set(label_names))
    y = np.array([classes.index(v) for v in label_names], dtype=np.int64)
    if len(y) != len(X):
        raise DataError("feature and label row counts differ")
    weights = balanced_class_weights(y, len(classes))
    if args.model == "l2lr":
        model = train_logreg(X, y, "l2", args.c, weights)
    elif args.model == "l1lr":
        model = train_logreg(X, y, "l1", args.c, weights)
    elif args.model == "svmlin":
        model = train_linear_svm(X, y, args.c, weights, seed=args.seed)
    elif args.model == "svmrbf":
        model = train_rbf_svm(X, y, args.c, gamma=args.gamma, class_weights=weights)
    elif args.model == "cart":
        model = train_cart(X, y, min_leaf=args.min_leaf, class_weights=weights)
    elif args.model == "rf":
        model = train_rf(
            X, y, n_trees=args.trees, min_leaf=args.min_leaf,
            seed=args.seed, class_weights=weights,
        )
    else:
        raise ConfigError(f"unknown model kind {args.model!r}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dump_model(model))
    train_pred = model.predict(X)
    acc = float(np.mean(train_pred == y))
    print(f"trained {args.model} (train accuracy {acc:.3f}) -> {out}")
    _log_line(
        out.parent,
        "train",
        {"features": args.features, "model": args.model, "c": args.c, "seed": args.seed},
        [out],
    )
    return 0


def cmd_benchmark(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    config = load_config(args.config)
    if args.seed is not None:
        config = type(config)(**{**config.__dict__, "seed": args.seed})
    if args.out_dir is not None:
        config = type(config)(**{**config.__dict__, "out_dir": args.out_dir})
    report = run_benchmark(config, config_hash(text), jobs=args.jobs)
    written = write_report(report, config.out_dir)
    for row in report.summary():
        print(
            f"{row['dataset']}\t{row['strategy']}\t"
            f"{row['mean_f1']:.1f} +- {row['std_f1']:.1f}"
        )
    for err in report.errors:
        print(f"ERROR\t{err['dataset']}\t{err['strategy']}\t{err['error']}")
    _log_line(Path(config.out_dir), "benchmark", {"config": args.config}, written)
    return 0


def cmd_report(args) -> int:
    written = write_tables(args.dir)
    if args.format == "records":
        import csv as _csv

        for table in list(written):
            if not table.endswith(".csv"):
                continue
            with open(table, newline="") as fh:
                rows = list(_csv.DictReader(fh))
            records = Path(table).with_suffix(".jsonl")
            with open(records, "w") as fh:
                for row in rows:
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
            written.append(str(records))
    for path in written:
        print(path)
    _log_line(Path(args.dir), "report", {"format": args.format}, written)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rulefeat")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download manifest entries into the cache")
    p.add_argument("--manifest", required=True)
    p.add_argument("--cache", default=None, help=f"cache dir (or ${CACHE_ENV})")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mine", help="mine rules from a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--miner", choices=("rm", "dt", "ar"), default="rm")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--z-min", type=float, default=1.96)
    p.add_argument("--dimension", type=int, default=1)
    p.add_argument("--z-denominator", choices=("mixed", "population"), default="mixed")
    p.add_argument("--missing-token", default="?")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("transform", help="build the local feature matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--rules", required=True)
    p.add_argument("--prep", default=None, help="prep sidecar (default <rules>.prep)")
    p.add_argument("--encoding", choices=(ENCODING_DEFAULT, ENCODING_BINARY), default=ENCODING_DEFAULT)
    p.add_argument("--out", required=True)
    p.add_argument("--missing-token", default="?")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("train", help="train one classifier on a feature matrix")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--model", required=True,
                   choices=("l2lr", "l1lr", "svmlin", "svmrbf", "cart", "rf"))
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--min-leaf", type=float, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("benchmark", help="run the configured benchmark")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out-dir", default=None, help="override the config out_dir")
    p.add_argument("--jobs", type=int, default=1, help="parallel cells")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("report", help="pivot persisted benchmark artifacts")
    p.add_argument("--dir", required=True)
    p.add_argument("--format", choices=("csv", "records"), default="csv")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RulefeatError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # invariant violations surface as exit 4
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
