"""Plot-ready comparison tables derived from persisted benchmark output.

Reads only the artifact files a benchmark run wrote (never recomputes
anything) and pivots them into one CSV per comparison level plus a
model-complexity table. Cells hold "mean +- std (mean/std)" strings
rounded to one decimal, matching how the scores are usually displayed.
"""

import csv
from pathlib import Path

from .config import CLASSIFIERS
from .errors import DataError


def _read_csv(path) -> list:
    if not Path(path).exists():
        raise DataError(f"missing benchmark artifact {path}")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _score_cell(row) -> str:
    mean = float(row["mean_f1"])
    std = float(row["std_f1"])
    ratio = float(row["mean_over_std"])
    ratio_s = "inf" if ratio == float("inf") else f"{ratio:.1f}"
    return f"{mean:.1f} +- {std:.1f} ({ratio_s})"


def _pivot(summary, strategies, datasets, cell) -> list:
    index = {(r["dataset"], r["strategy"]): r for r in summary}
    rows = []
    for strategy in strategies:
        row = {"strategy": strategy}
        found = False
        for ds in datasets:
            r = index.get((ds, strategy))
            row[ds] = cell(r) if r is not None else ""
            found = found or r is not None
        if found:
            rows.append(row)
    return rows


def write_tables(out_dir) -> list:
    """Emit table_level{1,2,3}.csv and table_complexity.csv."""
    out = Path(out_dir)
    summary = _read_csv(out / "summary.csv")
    stability = _read_csv(out / "stability.csv")
    datasets = sorted({r["dataset"] for r in summary})
    written = []

    level1 = []
    for clf in CLASSIFIERS:
        level1 += [f"global-{clf}", f"rm1d-{clf}"]
    level2 = ["rf"] + [f"rm1d-{clf}" for clf in CLASSIFIERS]
    level3 = []
    for clf in CLASSIFIERS:
        level3 += [f"rmdt-{clf}", f"rmar-{clf}", f"rm1d-{clf}"]

    for name, strategies in (
        ("table_level1.csv", level1),
        ("table_level2.csv", level2),
        ("table_level3.csv", level3),
    ):
        rows = _pivot(summary, strategies, datasets, _score_cell)
        path = out / name
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["strategy"] + datasets)
            writer.writeheader()
            writer.writerows(rows)
        written.append(str(path))

    rows = _pivot(
        summary,
        list(dict.fromkeys(level1 + level2 + level3)),
        datasets,
        lambda r: f"{float(r['median_complexity']):g}",
    )
    path = out / "table_complexity.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["strategy"] + datasets)
        writer.writeheader()
        writer.writerows(rows)
    written.append(str(path))

    path = out / "table_stability.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["dataset", "miner", "stability"])
        writer.writeheader()
        for r in stability:
            writer.writerow(
                {
                    "dataset": r["dataset"],
                    "miner": r["miner"],
                    "stability": f"{float(r['mean']):.1f} +- {float(r['std']):.1f}",
                }
            )
    written.append(str(path))
    return written
