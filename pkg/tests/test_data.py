"""Tests for dataset ingestion, imputation, quantization, and encoding."""

import numpy as np
import pytest

from rulefeat.datasets import balance_scale_dataset, builtin_dataset
from rulefeat.errors import ConfigError, DataError
from rulefeat.io import load_csv, read_schema, write_csv, write_schema
from rulefeat.preprocess import (
    apply_imputer,
    apply_quantizer,
    feature_levels,
    fit_imputer,
    fit_quantizer,
    one_hot,
)
from rulefeat.schema import (
    CATEGORICAL,
    CONTINUOUS,
    FeatureSchema,
    FeatureSpec,
    MISSING_CATEGORY,
    make_dataset,
)


@pytest.fixture
def mixed_schema():
    return FeatureSchema(
        features=(
            FeatureSpec("height", CONTINUOUS),
            FeatureSpec("color", CATEGORICAL, ("blue", "white", "red")),
        ),
        target_name="label",
        classes=("no", "yes"),
    )


class TestSchema:
    def test_duplicate_feature_names_rejected(self):
        with pytest.raises(DataError):
            FeatureSchema(
                features=(FeatureSpec("a", CONTINUOUS), FeatureSpec("a", CONTINUOUS)),
                target_name="y",
                classes=("0", "1"),
            )

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            FeatureSchema(
                features=(FeatureSpec("a", CONTINUOUS),),
                target_name="y",
                classes=("only",),
            )

    def test_categorical_needs_two_categories(self):
        with pytest.raises(DataError):
            FeatureSpec("c", CATEGORICAL, ("solo",))

    def test_column_length_mismatch_rejected(self, mixed_schema):
        with pytest.raises(DataError):
            make_dataset(mixed_schema, [[1.0, 2.0], [0]], [0, 1])

    def test_category_index_out_of_range_rejected(self, mixed_schema):
        with pytest.raises(DataError):
            make_dataset(mixed_schema, [[1.0], [5]], [0])


class TestLoadCsv:
    def test_wdbc_row_and_class_counts(self, tmp_path):
        # canonical WDBC distribution: 212 malignant / 357 benign
        ds = builtin_dataset("wdbc")
        assert ds.n == 569
        assert ds.schema.n_features == 30
        assert all(f.kind == CONTINUOUS for f in ds.schema.features)
        counts = dict(zip(ds.schema.classes, ds.class_counts()))
        assert counts == {"malignant": 212, "benign": 357}
        # round-trip through the CSV layer preserves everything
        path = tmp_path / "wdbc.csv"
        write_csv(ds, path)
        loaded = load_csv(path, ds.schema)
        assert np.array_equal(loaded.labels, ds.labels)
        for i in range(ds.schema.n_features):
            np.testing.assert_array_equal(loaded.column(i), ds.column(i))

    def test_header_only_file_is_an_error(self, tmp_path, mixed_schema):
        path = tmp_path / "empty.csv"
        path.write_text("height,color,label\n")
        with pytest.raises(DataError, match="no data rows"):
            load_csv(path, mixed_schema)

    def test_missing_token_becomes_missing_cell(self, tmp_path, mixed_schema):
        path = tmp_path / "m.csv"
        path.write_text("height,color,label\n1.5,blue,no\n?,red,yes\n")
        ds = load_csv(path, mixed_schema)
        assert ds.n == 2
        assert np.isnan(ds.column(0)[1])

    def test_unknown_category_is_an_error(self, tmp_path, mixed_schema):
        path = tmp_path / "bad.csv"
        path.write_text("height,color,label\n1.5,green,no\n")
        with pytest.raises(DataError, match="green"):
            load_csv(path, mixed_schema)

    def test_unknown_class_label_is_an_error(self, tmp_path, mixed_schema):
        path = tmp_path / "bad.csv"
        path.write_text("height,color,label\n1.5,blue,maybe\n")
        with pytest.raises(DataError, match="maybe"):
            load_csv(path, mixed_schema)

    def test_unparseable_number_is_an_error(self, tmp_path, mixed_schema):
        path = tmp_path / "bad.csv"
        path.write_text("height,color,label\nabc,blue,no\n")
        with pytest.raises(DataError, match="abc"):
            load_csv(path, mixed_schema)

    def test_column_count_mismatch_is_an_error(self, tmp_path, mixed_schema):
        path = tmp_path / "bad.csv"
        path.write_text("height,label\n1.5,no\n")
        with pytest.raises(DataError, match="columns"):
            load_csv(path, mixed_schema)

    def test_schema_file_round_trip(self, tmp_path, mixed_schema):
        path = tmp_path / "s.schema"
        write_schema(mixed_schema, path)
        assert read_schema(path) == mixed_schema

    def test_schema_file_syntax_error(self, tmp_path):
        path = tmp_path / "s.schema"
        path.write_text("feature\tx\tweird\n")
        with pytest.raises(ConfigError):
            read_schema(path)


class TestImputer:
    def test_modal_category_fill(self, mixed_schema):
        ds = make_dataset(
            mixed_schema,
            [[1.0, 1.0, 1.0, 1.0], [0, 0, 1, MISSING_CATEGORY]],
            [0, 0, 1, 1],
        )
        out = apply_imputer(fit_imputer(ds), ds)
        assert out.column(1)[3] == 0  # mode of {blue, blue, white}

    def test_median_fill(self, mixed_schema):
        ds = make_dataset(
            mixed_schema,
            [[1.0, 2.0, 4.0, np.nan], [0, 0, 0, 0]],
            [0, 0, 1, 1],
        )
        out = apply_imputer(fit_imputer(ds), ds)
        assert out.column(0)[3] == 2.0

    def test_no_missing_is_identity(self, mixed_schema):
        ds = make_dataset(mixed_schema, [[1.0, 2.0], [0, 1]], [0, 1])
        out = apply_imputer(fit_imputer(ds), ds)
        np.testing.assert_array_equal(out.column(0), ds.column(0))
        np.testing.assert_array_equal(out.column(1), ds.column(1))

    def test_observed_values_never_change(self, mixed_schema):
        rng = np.random.default_rng(3)
        vals = rng.normal(size=30)
        vals[rng.random(30) < 0.3] = np.nan
        cats = rng.integers(0, 3, 30)
        cats[rng.random(30) < 0.3] = MISSING_CATEGORY
        ds = make_dataset(mixed_schema, [vals, cats], rng.integers(0, 2, 30))
        out = apply_imputer(fit_imputer(ds), ds)
        keep = ~np.isnan(vals)
        np.testing.assert_array_equal(out.column(0)[keep], vals[keep])
        keep_c = cats != MISSING_CATEGORY
        np.testing.assert_array_equal(out.column(1)[keep_c], cats[keep_c])
        assert not out.has_missing()

    def test_entirely_missing_feature_rejected(self, mixed_schema):
        ds = make_dataset(
            mixed_schema, [[np.nan, np.nan], [0, 1]], [0, 1]
        )
        with pytest.raises(DataError, match="height"):
            fit_imputer(ds)


class TestQuantizer:
    def _continuous_ds(self, values, labels=None):
        schema = FeatureSchema(
            features=(FeatureSpec("x", CONTINUOUS),),
            target_name="y",
            classes=("a", "b"),
        )
        labels = labels if labels is not None else [0, 1] * (len(values) // 2) + [0] * (len(values) % 2)
        return make_dataset(schema, [values], labels)

    def test_ten_equally_frequent_values_one_per_bin(self):
        values = [float(v) for v in range(1, 11)] * 5
        ds = self._continuous_ds(values)
        bm = fit_quantizer(ds, 10)
        binned = apply_quantizer(bm, ds)
        assert bm.level_count(0, ds.schema) == 10
        # every distinct input value lands in its own bin
        mapping = {}
        for v, b in zip(values, binned.column(0)):
            mapping.setdefault(v, set()).add(int(b))
        assert all(len(bins) == 1 for bins in mapping.values())
        assert {min(b) for b in mapping.values()} == set(range(1, 11))

    def test_constant_column_single_bin(self):
        ds = self._continuous_ds([4.2] * 8)
        bm = fit_quantizer(ds, 10)
        assert bm.level_count(0, ds.schema) == 1
        assert set(apply_quantizer(bm, ds).column(0)) == {1}

    def test_bins_partition_fit_range(self):
        rng = np.random.default_rng(8)
        values = rng.normal(size=200)
        ds = self._continuous_ds(list(values))
        bm = fit_quantizer(ds, 10)
        intervals = bm.intervals(0)
        assert intervals[0][0] == pytest.approx(values.min())
        assert intervals[-1][1] == pytest.approx(values.max())
        for (lo1, hi1), (lo2, hi2) in zip(intervals, intervals[1:]):
            assert hi1 == lo2  # contiguous
        binned = apply_quantizer(bm, ds).column(0)
        assert binned.min() >= 1 and binned.max() <= len(intervals)

    def test_out_of_range_values_clamp(self):
        ds = self._continuous_ds([1.0, 2.0, 3.0, 4.0])
        bm = fit_quantizer(ds, 4)
        other = self._continuous_ds([-10.0, 10.0, 1.0, 4.0])
        binned = apply_quantizer(bm, other).column(0)
        assert binned[0] == 1
        assert binned[1] == bm.level_count(0, ds.schema)

    def test_rebinning_is_identity(self):
        ds = self._continuous_ds([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        bm = fit_quantizer(ds, 3)
        binned = apply_quantizer(bm, ds)
        again = apply_quantizer(bm, binned)
        assert again is binned

    def test_categorical_passes_through(self):
        schema = FeatureSchema(
            features=(FeatureSpec("c", CATEGORICAL, ("x", "y")),),
            target_name="t",
            classes=("a", "b"),
        )
        ds = make_dataset(schema, [[0, 1, 0, 1]], [0, 1, 0, 1])
        bm = fit_quantizer(ds, 10)
        binned = apply_quantizer(bm, ds)
        np.testing.assert_array_equal(binned.column(0), ds.column(0))

    def test_every_fit_value_maps_into_exactly_one_bin(self):
        rng = np.random.default_rng(12)
        values = list(rng.uniform(0, 5, 120))
        ds = self._continuous_ds(values)
        bm = fit_quantizer(ds, 10)
        intervals = bm.intervals(0)
        for v in values:
            hits = [
                j
                for j, (lo, hi) in enumerate(intervals)
                if (lo <= v < hi) or (j == len(intervals) - 1 and lo <= v <= hi)
            ]
            assert len(hits) == 1


class TestOneHot:
    def test_single_categorical_sample(self):
        schema = FeatureSchema(
            features=(FeatureSpec("c", CATEGORICAL, ("blue", "white", "red")),),
            target_name="t",
            classes=("a", "b"),
        )
        ds = make_dataset(schema, [[2]], [0], binned=True)
        np.testing.assert_array_equal(one_hot(ds), [[0.0, 0.0, 1.0]])

    def test_column_arity_sum(self):
        schema = FeatureSchema(
            features=(
                FeatureSpec("c3", CATEGORICAL, ("a", "b", "c")),
                FeatureSpec("c2", CATEGORICAL, ("x", "y")),
            ),
            target_name="t",
            classes=("p", "q"),
        )
        ds = make_dataset(schema, [[0, 1, 2], [0, 1, 0]], [0, 1, 0], binned=True)
        assert one_hot(ds).shape == (3, 5)

    def test_one_indicator_per_feature_block(self):
        ds = builtin_dataset("iris")
        binned = apply_quantizer(fit_quantizer(ds, 10), ds)
        X = one_hot(binned)
        start = 0
        for i in range(binned.schema.n_features):
            width = len(feature_levels(binned, i))
            block = X[:, start : start + width]
            np.testing.assert_array_equal(block.sum(axis=1), np.ones(len(X)))
            start += width
        assert start == X.shape[1]


class TestBinnedExport:
    def test_binned_dataset_written_with_bin_indices(self, tmp_path):
        ds = builtin_dataset("iris")
        binned = apply_quantizer(fit_quantizer(ds, 10), ds)
        path = tmp_path / "binned.csv"
        write_csv(binned, path)
        lines = path.read_text().splitlines()
        assert len(lines) == ds.n + 1
        first = lines[1].split(",")
        assert all(cell.isdigit() for cell in first[:-1])
        assert first[-1] in ds.schema.classes


class TestBalanceScale:
    def test_exact_factorial_and_class_counts(self):
        ds = balance_scale_dataset()
        assert ds.n == 625
        counts = dict(zip(ds.schema.classes, ds.class_counts()))
        assert counts == {"L": 288, "B": 49, "R": 288}

    def test_labels_satisfy_the_torque_rule(self):
        ds = balance_scale_dataset()
        for r in range(0, 625, 13):
            lw, ld, rw, rd = (int(ds.column(i)[r]) + 1 for i in range(4))
            left, right = lw * ld, rw * rd
            want = 0 if left > right else (1 if left == right else 2)
            assert ds.labels[r] == want
