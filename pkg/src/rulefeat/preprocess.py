"""Missing-value imputation, quantile binning, and one-hot encoding.

All fit/apply pairs are leakage-safe: statistics come from the fit data
only, and applying to new data never updates them. Quantization targets
a fixed bin count (10 by default across the toolkit) using empirical
quantiles; duplicate quantile edges collapse, so the realized bin count
can be smaller.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .schema import CATEGORICAL, CONTINUOUS, Dataset


@dataclass(frozen=True)
class Imputer:
    """Per-feature fill values: medians for continuous, modes for categorical."""

    fills: tuple[float, ...]

    @classmethod
    def fit(cls, ds: Dataset) -> "Imputer":
        if ds.binned:
            raise DataError("imputation must run before quantization")
        fills = []
        for i, spec in enumerate(ds.schema.features):
            col = ds.column(i)
            observed = col[~ds.missing_mask(i)]
            if len(observed) == 0:
                raise DataError(f"feature {spec.name!r} has no observed values")
            if spec.kind == CONTINUOUS:
                fills.append(float(np.median(observed)))
            else:
                counts = np.bincount(observed, minlength=len(spec.categories))
                fills.append(float(np.argmax(counts)))  # ties: lowest index
        return cls(fills=tuple(fills))

    def to_dict(self) -> dict:
        return {"fills": list(self.fills)}

    @classmethod
    def from_dict(cls, d: dict) -> "Imputer":
        return cls(fills=tuple(float(v) for v in d["fills"]))

    def apply(self, ds: Dataset) -> Dataset:
        if ds.binned:
            raise DataError("imputation must run before quantization")
        if len(self.fills) != ds.schema.n_features:
            raise DataError("imputer fitted on a different schema")
        cols = []
        for i, spec in enumerate(ds.schema.features):
            col = ds.column(i)
            mask = ds.missing_mask(i)
            if not mask.any():
                cols.append(col)
                continue
            out = col.copy()
            if spec.kind == CONTINUOUS:
                out[mask] = self.fills[i]
            else:
                out[mask] = int(self.fills[i])
            cols.append(out)
        return Dataset(schema=ds.schema, columns=tuple(cols), labels=ds.labels)


def fit_imputer(train: Dataset) -> Imputer:
    return Imputer.fit(train)


def apply_imputer(imp: Imputer, ds: Dataset) -> Dataset:
    return imp.apply(ds)


@dataclass(frozen=True)
class BinMap:
    """Quantile intervals per continuous feature; categories pass through.

    ``edges[i]`` is None for categorical features. For continuous ones it
    holds the deduplicated quantile edges e_0 < ... < e_k fitted on the
    training column; bin j (1-based) covers [e_{j-1}, e_j), except the
    last bin which is closed on the right. Values outside [e_0, e_k]
    clamp into the first or last bin. A constant column yields the single
    degenerate interval [c, c].
    """

    edges: tuple
    n_bins_requested: int

    @classmethod
    def fit(cls, ds: Dataset, n_bins: int) -> "BinMap":
        if n_bins < 1:
            raise DataError("n_bins must be >= 1")
        if ds.binned:
            raise DataError("data is already binned")
        if ds.has_missing():
            raise DataError("impute before fitting the quantizer")
        edges = []
        for i, spec in enumerate(ds.schema.features):
            if spec.kind == CATEGORICAL:
                edges.append(None)
                continue
            col = ds.column(i)
            qs = np.quantile(col, np.linspace(0.0, 1.0, n_bins + 1))
            uniq = np.unique(qs)
            edges.append(tuple(float(e) for e in uniq))
        return cls(edges=tuple(edges), n_bins_requested=n_bins)

    def to_dict(self) -> dict:
        return {
            "edges": [None if e is None else list(e) for e in self.edges],
            "n_bins_requested": self.n_bins_requested,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BinMap":
        return cls(
            edges=tuple(
                None if e is None else tuple(float(v) for v in e) for e in d["edges"]
            ),
            n_bins_requested=int(d["n_bins_requested"]),
        )

    def level_count(self, i: int, schema) -> int:
        """Number of distinct levels feature ``i`` takes after binning."""
        spec = schema.features[i]
        if spec.kind == CATEGORICAL:
            return len(spec.categories)
        e = self.edges[i]
        return max(len(e) - 1, 1)

    def intervals(self, i: int) -> tuple:
        """Value intervals (lo, hi) of each bin of continuous feature ``i``."""
        e = self.edges[i]
        if e is None:
            raise DataError("feature is categorical")
        if len(e) == 1:
            return ((e[0], e[0]),)
        return tuple((e[j], e[j + 1]) for j in range(len(e) - 1))

    def bin_bounds(self, i: int, lo_bin: int, hi_bin: int) -> tuple[float, float]:
        """Original-scale value bounds covered by bins lo_bin..hi_bin."""
        iv = self.intervals(i)
        return iv[lo_bin - 1][0], iv[hi_bin - 1][1]

    def bin_column(self, i: int, col: np.ndarray) -> np.ndarray:
        e = np.asarray(self.edges[i])
        if len(e) == 1:
            return np.ones(len(col), dtype=np.int64)
        k = len(e) - 1
        idx = np.searchsorted(e, col, side="right") - 1
        return np.clip(idx, 0, k - 1).astype(np.int64) + 1

    def apply(self, ds: Dataset) -> Dataset:
        if ds.binned:
            return ds  # re-binning bin indices is the identity
        if ds.has_missing():
            raise DataError("impute before quantizing")
        cols = []
        for i, spec in enumerate(ds.schema.features):
            if spec.kind == CATEGORICAL:
                cols.append(ds.column(i))
            else:
                cols.append(self.bin_column(i, ds.column(i)))
        return Dataset(
            schema=ds.schema,
            columns=tuple(cols),
            labels=ds.labels,
            binned=True,
            binmap=self,
        )


def fit_quantizer(train: Dataset, n_bins: int) -> BinMap:
    return BinMap.fit(train, n_bins)


def apply_quantizer(bm: BinMap, ds: Dataset) -> Dataset:
    return bm.apply(ds)


def feature_levels(ds: Dataset, i: int) -> np.ndarray:
    """Valid level values of feature ``i`` in a binned dataset.

    Continuous features use bin indices 1..k, categorical features their
    0-based category indices.
    """
    spec = ds.schema.features[i]
    if spec.kind == CATEGORICAL:
        return np.arange(len(spec.categories), dtype=np.int64)
    if not ds.binned or ds.binmap is None:
        raise DataError("dataset is not binned")
    k = ds.binmap.level_count(i, ds.schema)
    return np.arange(1, k + 1, dtype=np.int64)


def one_hot(ds: Dataset) -> np.ndarray:
    """Expand every feature of a binned dataset into indicator columns.

    A feature with k levels becomes k columns; exactly one of them is 1
    per sample. Column order is feature order, then level order.
    """
    if not ds.binned:
        raise DataError("one_hot expects a binned dataset")
    if ds.has_missing():
        raise DataError("one_hot expects an imputed dataset")
    blocks = []
    for i in range(ds.schema.n_features):
        levels = feature_levels(ds, i)
        col = ds.column(i)
        blocks.append((col[:, None] == levels[None, :]).astype(np.float64))
    return np.hstack(blocks)


def one_hot_column_names(ds: Dataset) -> list[str]:
    """Column labels matching ``one_hot`` output order."""
    names = []
    for i, spec in enumerate(ds.schema.features):
        for level in feature_levels(ds, i):
            if spec.kind == CATEGORICAL:
                names.append(f"{spec.name}={spec.categories[level]}")
            else:
                names.append(f"{spec.name}=bin{level}")
    return names
