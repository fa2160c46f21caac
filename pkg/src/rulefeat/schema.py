"""Column-typed datasets with explicit missing-value markers.

A Dataset is immutable after construction: every transformation
(imputation, quantization, encoding) returns a new instance. Continuous
columns are float64 with NaN marking missing cells; categorical columns
are int64 indices into the schema's category list with -1 marking
missing cells. After quantization, continuous columns hold int64 bin
indices (1..k).
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

#: Missing-value marker for categorical columns (continuous columns use NaN).
MISSING_CATEGORY = -1


@dataclass(frozen=True)
class FeatureSpec:
    """One input column: a name, a kind, and categories when categorical."""

    name: str
    kind: str
    categories: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise DataError(f"unknown feature kind {self.kind!r} for {self.name!r}")
        if self.kind == CATEGORICAL:
            if not self.categories or len(self.categories) < 2:
                raise DataError(f"categorical feature {self.name!r} needs >= 2 categories")
            if len(set(self.categories)) != len(self.categories):
                raise DataError(f"duplicate categories in feature {self.name!r}")
        elif self.categories is not None:
            raise DataError(f"continuous feature {self.name!r} cannot list categories")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature descriptions plus the target's class labels."""

    features: tuple[FeatureSpec, ...]
    target_name: str
    classes: tuple[str, ...]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        if self.target_name in names:
            raise DataError("target name collides with a feature name")
        if len(self.classes) < 2:
            raise DataError("need at least 2 class labels")
        if len(set(self.classes)) != len(self.classes):
            raise DataError("duplicate class labels")

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def feature_index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise DataError(f"unknown feature {name!r}")


@dataclass(frozen=True)
class Dataset:
    """Per-feature value columns plus integer class labels.

    ``binned`` marks datasets whose continuous columns have been replaced
    by quantile-bin indices; ``binmap`` then references the fitted
    quantizer so downstream consumers can recover interval edges and
    level counts.
    """

    schema: FeatureSchema
    columns: tuple[np.ndarray, ...]
    labels: np.ndarray
    binned: bool = False
    binmap: object = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.columns) != self.schema.n_features:
            raise DataError("column count does not match schema")
        n = len(self.labels)
        if n < 1:
            raise DataError("dataset is empty")
        for spec, col in zip(self.schema.features, self.columns):
            if len(col) != n:
                raise DataError(f"column {spec.name!r} length differs from label count")
            if spec.kind == CATEGORICAL:
                valid = (col == MISSING_CATEGORY) | (
                    (col >= 0) & (col < len(spec.categories))
                )
                if not np.all(valid):
                    raise DataError(f"out-of-range category index in {spec.name!r}")
        if not np.all((self.labels >= 0) & (self.labels < self.schema.n_classes)):
            raise DataError("label index out of range")

    @property
    def n(self) -> int:
        return len(self.labels)

    def column(self, i: int) -> np.ndarray:
        return self.columns[i]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.schema.n_classes)

    def missing_mask(self, i: int) -> np.ndarray:
        spec = self.schema.features[i]
        col = self.columns[i]
        if spec.kind == CONTINUOUS and not self.binned:
            return np.isnan(col)
        return col == MISSING_CATEGORY

    def has_missing(self) -> bool:
        return any(self.missing_mask(i).any() for i in range(self.schema.n_features))

    def take(self, indices: Sequence[int]) -> "Dataset":
        """Row subset preserving order of ``indices``."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            schema=self.schema,
            columns=tuple(col[idx] for col in self.columns),
            labels=self.labels[idx],
            binned=self.binned,
            binmap=self.binmap,
        )

    def with_labels(self, labels: np.ndarray) -> "Dataset":
        return Dataset(
            schema=self.schema,
            columns=self.columns,
            labels=np.asarray(labels, dtype=np.int64),
            binned=self.binned,
            binmap=self.binmap,
        )


def make_dataset(
    schema: FeatureSchema,
    columns: Sequence[Sequence],
    labels: Sequence[int],
    binned: bool = False,
    binmap: object = None,
) -> Dataset:
    """Build a Dataset from plain sequences, coercing column dtypes."""
    cols = []
    for spec, col in zip(schema.features, columns):
        if spec.kind == CONTINUOUS and not binned:
            cols.append(np.asarray(col, dtype=np.float64))
        else:
            cols.append(np.asarray(col, dtype=np.int64))
    return Dataset(
        schema=schema,
        columns=tuple(cols),
        labels=np.asarray(labels, dtype=np.int64),
        binned=binned,
        binmap=binmap,
    )
