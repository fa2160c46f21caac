"""CSV and schema-file input/output.

Schema description files are plain text, one entry per line,
tab-separated so feature names may contain spaces:

    feature<TAB>mean radius<TAB>continuous
    feature<TAB>x4<TAB>categorical<TAB>blue,white,red
    target<TAB>diagnosis<TAB>malignant,benign

Data files are ordinary comma-separated CSV with one header row naming
the columns; the missing-value token (default "?") marks absent cells.
"""

import csv
import io as _io
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .schema import (
    CATEGORICAL,
    CONTINUOUS,
    Dataset,
    FeatureSchema,
    FeatureSpec,
    MISSING_CATEGORY,
    make_dataset,
)

DEFAULT_MISSING_TOKEN = "?"


def read_schema(path) -> FeatureSchema:
    """Parse a schema description file."""
    features = []
    target = None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read schema file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        kind = parts[0].strip()
        if kind == "feature":
            if len(parts) < 3:
                raise ConfigError(f"{path}:{lineno}: feature line needs name and kind")
            name = parts[1].strip()
            fkind = parts[2].strip()
            if fkind == CATEGORICAL:
                if len(parts) < 4:
                    raise ConfigError(f"{path}:{lineno}: categorical feature needs categories")
                cats = tuple(c.strip() for c in parts[3].split(","))
                features.append(FeatureSpec(name, CATEGORICAL, cats))
            elif fkind == CONTINUOUS:
                features.append(FeatureSpec(name, CONTINUOUS))
            else:
                raise ConfigError(f"{path}:{lineno}: unknown feature kind {fkind!r}")
        elif kind == "target":
            if len(parts) < 3:
                raise ConfigError(f"{path}:{lineno}: target line needs name and labels")
            target = (parts[1].strip(), tuple(c.strip() for c in parts[2].split(",")))
        else:
            raise ConfigError(f"{path}:{lineno}: unknown entry {kind!r}")
    if target is None:
        raise ConfigError(f"{path}: missing target line")
    if not features:
        raise ConfigError(f"{path}: no features declared")
    return FeatureSchema(features=tuple(features), target_name=target[0], classes=target[1])


def write_schema(schema: FeatureSchema, path) -> None:
    lines = []
    for f in schema.features:
        if f.kind == CATEGORICAL:
            lines.append(f"feature\t{f.name}\t{f.kind}\t{','.join(f.categories)}")
        else:
            lines.append(f"feature\t{f.name}\t{f.kind}")
    lines.append(f"target\t{schema.target_name}\t{','.join(schema.classes)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_csv(path, schema: FeatureSchema, missing_token: str = DEFAULT_MISSING_TOKEN) -> Dataset:
    """Read a CSV file against a schema.

    Columns are matched by header name, so their order in the file does
    not matter; the file must contain exactly the schema's features plus
    the target column. Row order is preserved.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return _parse_csv(text, schema, missing_token, source=str(path))


def _parse_csv(text: str, schema: FeatureSchema, missing_token: str, source: str) -> Dataset:
    reader = csv.reader(_io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: empty file") from None
    header = [h.strip() for h in header]
    expected = [f.name for f in schema.features] + [schema.target_name]
    if len(header) != len(expected):
        raise DataError(
            f"{source}: expected {len(expected)} columns, found {len(header)}"
        )
    if set(header) != set(expected):
        missing = set(expected) - set(header)
        raise DataError(f"{source}: header does not match schema (missing {sorted(missing)})")
    pos = {name: header.index(name) for name in expected}

    raw_cols: list[list] = [[] for _ in schema.features]
    labels: list[int] = []
    class_index = {c: i for i, c in enumerate(schema.classes)}
    cat_index = [
        {c: i for i, c in enumerate(f.categories)} if f.kind == CATEGORICAL else None
        for f in schema.features
    ]
    for rowno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(expected):
            raise DataError(f"{source}:{rowno}: expected {len(expected)} cells, found {len(row)}")
        for i, spec in enumerate(schema.features):
            cell = row[pos[spec.name]].strip()
            if cell == missing_token:
                raw_cols[i].append(np.nan if spec.kind == CONTINUOUS else MISSING_CATEGORY)
                continue
            if spec.kind == CONTINUOUS:
                try:
                    raw_cols[i].append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{source}:{rowno}: cannot parse {cell!r} as a number for {spec.name!r}"
                    ) from None
            else:
                try:
                    raw_cols[i].append(cat_index[i][cell])
                except KeyError:
                    raise DataError(
                        f"{source}:{rowno}: unknown category {cell!r} for {spec.name!r}"
                    ) from None
        label_cell = row[pos[schema.target_name]].strip()
        try:
            labels.append(class_index[label_cell])
        except KeyError:
            raise DataError(f"{source}:{rowno}: unknown class label {label_cell!r}") from None
    if not labels:
        raise DataError(f"{source}: no data rows")
    return make_dataset(schema, raw_cols, labels)


def write_csv(ds: Dataset, path, missing_token: str = DEFAULT_MISSING_TOKEN) -> None:
    """Write a dataset back to CSV.

    Binned continuous columns are emitted as bin indices; categorical
    values and class labels are written by name.
    """
    schema = ds.schema
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f.name for f in schema.features] + [schema.target_name])
        for r in range(ds.n):
            row = []
            for i, spec in enumerate(schema.features):
                v = ds.column(i)[r]
                if spec.kind == CATEGORICAL:
                    row.append(missing_token if v == MISSING_CATEGORY else spec.categories[int(v)])
                elif ds.binned:
                    row.append(str(int(v)))
                else:
                    row.append(missing_token if np.isnan(v) else repr(float(v)))
            row.append(schema.classes[int(ds.labels[r])])
            writer.writerow(row)
