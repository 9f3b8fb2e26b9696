import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boundarycf import (
    CATEGORICAL,
    CsvFormatError,
    Dataset,
    Feature,
    FeatureSchema,
    feature_bounds,
    load_csv,
    make_classification,
    save_csv,
    split,
    standardize,
    toy_points,
)


def mixed_schema():
    return FeatureSchema(
        (
            Feature("age"),
            Feature("sex", kind=CATEGORICAL, category_count=2),
            Feature("rate"),
        )
    )


class TestMakeClassification:
    def test_shapes_and_labels(self):
        data = make_classification(101, 3, 2.0, seed=0)
        assert data.rows.shape == (101, 3)
        assert data.labels.shape == (101,)
        c0, c1 = data.class_counts()
        assert (c0, c1) == (50, 51)

    def test_deterministic_per_seed(self):
        a = make_classification(50, 2, 1.5, seed=4)
        b = make_classification(50, 2, 1.5, seed=4)
        c = make_classification(50, 2, 1.5, seed=5)
        assert np.array_equal(a.rows, b.rows)
        assert np.array_equal(a.labels, b.labels)
        assert not np.array_equal(a.rows, c.rows)

    def test_separation_scales_with_class_sep(self):
        wide = make_classification(400, 2, 6.0, seed=1)
        narrow = make_classification(400, 2, 0.5, seed=1)

        def gap(d):
            m0 = d.rows[d.labels == 0].mean(axis=0)
            m1 = d.rows[d.labels == 1].mean(axis=0)
            return np.linalg.norm(m1 - m0)

        assert gap(wide) > gap(narrow)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_samples": 3},
            {"n_features": 0},
            {"class_sep": 0.0},
            {"class_sep": -1.0},
        ],
    )
    def test_rejects_bad_arguments(self, kwargs):
        base = {"n_samples": 10, "n_features": 2, "class_sep": 1.0, "seed": 0}
        base.update(kwargs)
        with pytest.raises(ValueError):
            make_classification(**base)


class TestToyPoints:
    def test_fixed_content(self):
        data = toy_points()
        assert data.rows.shape == (20, 2)
        assert data.class_counts() == (10, 10)
        # cluster means stay put: class 0 near (8, 10), class 1 near (14, 20)
        m0 = data.rows[data.labels == 0].mean(axis=0)
        m1 = data.rows[data.labels == 1].mean(axis=0)
        assert np.linalg.norm(m0 - [8, 10]) < 1.5
        assert np.linalg.norm(m1 - [14, 20]) < 1.5

    def test_same_every_call(self):
        assert np.array_equal(toy_points().rows, toy_points().rows)


class TestDatasetValidation:
    def test_rejects_bad_labels(self):
        schema = FeatureSchema.continuous_features(["a"])
        with pytest.raises(ValueError, match="labels"):
            Dataset(schema, np.zeros((2, 1)), np.array([0, 2]))

    def test_rejects_nonfinite_rows(self):
        schema = FeatureSchema.continuous_features(["a"])
        with pytest.raises(ValueError, match="finite"):
            Dataset(schema, np.array([[np.nan]]), np.array([0]))

    def test_rejects_width_mismatch(self):
        schema = FeatureSchema.continuous_features(["a", "b"])
        with pytest.raises(ValueError, match="width"):
            Dataset(schema, np.zeros((2, 3)), np.array([0, 1]))

    def test_rows_read_only(self):
        data = make_classification(10, 2, 1.0, seed=0)
        with pytest.raises(ValueError):
            data.rows[0, 0] = 99.0


class TestCsvRoundTrip:
    def test_save_load_exact(self, tmp_path):
        data = make_classification(40, 3, 2.0, seed=9)
        path = tmp_path / "d.csv"
        save_csv(data, path)
        back = load_csv(path, data.schema, "label")
        assert np.array_equal(back.rows, data.rows)
        assert np.array_equal(back.labels, data.labels)

    def test_header_order_free(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("label,rate,sex,age\n0,1.5,1,30\n1,2.5,0,40\n")
        data = load_csv(path, mixed_schema(), "label")
        assert data.rows.tolist() == [[30.0, 1.0, 1.5], [40.0, 0.0, 2.5]]
        assert data.labels.tolist() == [0, 1]

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("age,sex,label\n30,1,0\n")
        with pytest.raises(CsvFormatError) as err:
            load_csv(path, mixed_schema(), "label")
        assert "rate" in str(err.value)

    def test_bad_numeric_cell_reports_row_and_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("age,sex,rate,label\n30,1,1.5,0\nthirty,0,2.0,1\n")
        with pytest.raises(CsvFormatError) as err:
            load_csv(path, mixed_schema(), "label")
        assert err.value.row == 2
        assert err.value.column == "age"

    def test_fractional_categorical_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("age,sex,rate,label\n30,0.5,1.5,0\n40,1,2.0,1\n")
        with pytest.raises(CsvFormatError) as err:
            load_csv(path, mixed_schema(), "label")
        assert err.value.column == "sex"

    def test_out_of_range_categorical_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("age,sex,rate,label\n30,5,1.5,0\n40,1,2.0,1\n")
        with pytest.raises(CsvFormatError):
            load_csv(path, mixed_schema(), "label")

    def test_single_class_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("age,sex,rate,label\n30,1,1.5,0\n40,0,2.0,0\n")
        with pytest.raises(CsvFormatError, match="class"):
            load_csv(path, mixed_schema(), "label")

    def test_observed_bounds_refreshed(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("age,sex,rate,label\n30,1,1.5,0\n40,0,2.5,1\n")
        data = load_csv(path, mixed_schema(), "label")
        ages = data.schema.features[0]
        assert (ages.observed_min, ages.observed_max) == (30.0, 40.0)

    @given(
        st.integers(min_value=4, max_value=30),
        st.integers(min_value=1, max_value=4),
        st.integers(min_value=0, max_value=10_000),
    )
    def test_round_trip_random_datasets(self, tmp_path_factory, n, d, seed):
        data = make_classification(n, d, 1.0, seed=seed)
        path = tmp_path_factory.mktemp("csv") / "d.csv"
        save_csv(data, path)
        back = load_csv(path, data.schema, "label")
        assert np.array_equal(back.rows, data.rows)


class TestSplit:
    def test_stratified_counts(self):
        data = make_classification(100, 2, 2.0, seed=0)
        train, test = split(data, 0.8, seed=1)
        assert train.n_samples + test.n_samples == 100
        c0, c1 = data.class_counts()
        t0, t1 = train.class_counts()
        assert t0 == round(0.8 * c0)
        assert t1 == round(0.8 * c1)

    def test_deterministic(self):
        data = make_classification(60, 2, 2.0, seed=0)
        a1, b1 = split(data, 0.7, seed=3)
        a2, b2 = split(data, 0.7, seed=3)
        assert np.array_equal(a1.rows, a2.rows)
        assert np.array_equal(b1.rows, b2.rows)

    def test_extreme_fraction_keeps_both_sides_nonempty(self):
        data = make_classification(20, 2, 2.0, seed=0)
        train, test = split(data, 0.99, seed=0)
        assert test.n_samples >= 1
        train, test = split(data, 0.01, seed=0)
        assert train.n_samples >= 1

    @given(st.floats(min_value=0.1, max_value=0.9), st.integers(0, 1000))
    def test_partition_is_exact(self, fraction, seed):
        data = make_classification(50, 2, 2.0, seed=7)
        train, test = split(data, fraction, seed=seed)
        merged = np.vstack([train.rows, test.rows])
        assert merged.shape[0] == data.n_samples
        # every original row appears exactly once across the two sides
        original = {tuple(r) for r in data.rows}
        recombined = [tuple(r) for r in merged]
        assert set(recombined) == original
        assert len(recombined) == len(original)

    def test_rejects_bad_fraction(self):
        data = make_classification(10, 2, 2.0, seed=0)
        with pytest.raises(ValueError):
            split(data, 0.0, seed=0)
        with pytest.raises(ValueError):
            split(data, 1.0, seed=0)


class TestBoundsAndStandardize:
    def test_feature_bounds_exact(self):
        schema = FeatureSchema.continuous_features(["a", "b"])
        data = Dataset(schema, np.array([[1.0, 5.0], [3.0, -2.0]]), np.array([0, 1]))
        assert feature_bounds(data) == [(1.0, 3.0), (-2.0, 5.0)]

    def test_standardize_moments(self):
        data = make_classification(200, 3, 2.0, seed=2)
        scaled, mean, std = standardize(data)
        assert np.allclose(scaled.rows.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(scaled.rows.std(axis=0), 1.0, atol=1e-12)
        assert np.allclose(scaled.rows * std + mean, data.rows)

    def test_standardize_constant_column(self):
        schema = FeatureSchema.continuous_features(["a", "b"])
        rows = np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0], [5.0, 4.0]])
        data = Dataset(schema, rows, np.array([0, 1, 0, 1]))
        scaled, _, std = standardize(data)
        assert std[0] == 1.0
        assert np.allclose(scaled.rows[:, 0], 0.0)
