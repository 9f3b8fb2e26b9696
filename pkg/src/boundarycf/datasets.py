"""Binary-classification datasets with mixed continuous/categorical features.

A :class:`Dataset` is an immutable (schema, rows, labels) triple.  Categorical
features are stored as whole-valued floats so that every row lives in one
numeric matrix; interpolation downstream is allowed to produce fractional
categorical values on purpose.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

# tight clusters keep class_sep the dominant scale of the generated geometry
_CLUSTER_STD = 0.3


class CsvFormatError(ValueError):
    """A CSV file violated the declared schema; names the offending row/column."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str = CONTINUOUS
    observed_min: float = 0.0
    observed_max: float = 0.0
    category_count: int | None = None

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.observed_min > self.observed_max:
            raise ValueError(
                f"feature {self.name!r}: observed_min {self.observed_min} > observed_max {self.observed_max}"
            )
        if self.kind == CATEGORICAL:
            if self.category_count is None or self.category_count < 1:
                raise ValueError(f"categorical feature {self.name!r} needs category_count >= 1")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered per-feature metadata: name, kind, and observed bounds."""

    features: tuple[Feature, ...]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names in schema")
        object.__setattr__(self, "features", tuple(self.features))

    def __len__(self) -> int:
        return len(self.features)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def categorical_indices(self) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.kind == CATEGORICAL]

    @property
    def continuous_indices(self) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.kind == CONTINUOUS]

    @staticmethod
    def continuous_features(names: list[str]) -> "FeatureSchema":
        return FeatureSchema(tuple(Feature(name=n) for n in names))

    def with_observed_bounds(self, mins: np.ndarray, maxs: np.ndarray) -> "FeatureSchema":
        feats = tuple(
            replace(f, observed_min=float(lo), observed_max=float(hi))
            for f, lo, hi in zip(self.features, mins, maxs)
        )
        return FeatureSchema(feats)


@dataclass(frozen=True)
class Dataset:
    """Row-major instance matrix plus binary labels, immutable once built."""

    schema: FeatureSchema
    rows: np.ndarray
    labels: np.ndarray
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-D matrix")
        if rows.shape[1] != len(self.schema):
            raise ValueError(
                f"row width {rows.shape[1]} does not match schema width {len(self.schema)}"
            )
        if rows.shape[0] != labels.shape[0]:
            raise ValueError("rows and labels disagree on N")
        if self._validate and labels.size and not np.isin(labels, (0, 1)).all():
            bad = labels[~np.isin(labels, (0, 1))][0]
            raise ValueError(f"labels must be 0 or 1, found {bad}")
        if self._validate and not np.isfinite(rows).all():
            raise ValueError("rows contain non-finite values")
        rows.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def class_counts(self) -> tuple[int, int]:
        return int(np.sum(self.labels == 0)), int(np.sum(self.labels == 1))


def load_csv(path, schema: FeatureSchema, label_column: str) -> Dataset:
    """Load a header-first CSV into a Dataset, validating against the schema.

    Columns may appear in any order; the header must contain every schema
    feature plus ``label_column``.  Categorical cells must be whole-valued
    codes inside ``[0, category_count - 1]``.  Observed bounds in the returned
    schema are refreshed from the data.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("empty CSV file") from None
        header = [h.strip() for h in header]
        col_of = {name: i for i, name in enumerate(header)}
        for name in schema.names + [label_column]:
            if name not in col_of:
                raise CsvFormatError(f"missing column {name!r}", column=name)
        feat_cols = [col_of[name] for name in schema.names]
        label_col = col_of[label_column]

        rows, labels = [], []
        for row_idx, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if len(record) != len(header):
                raise CsvFormatError(
                    f"row {row_idx}: expected {len(header)} cells, got {len(record)}",
                    row=row_idx,
                )
            values = np.empty(len(schema), dtype=np.float64)
            for j, (feat, col) in enumerate(zip(schema.features, feat_cols)):
                cell = record[col].strip()
                try:
                    values[j] = float(cell)
                except ValueError:
                    raise CsvFormatError(
                        f"row {row_idx}, column {feat.name!r}: non-numeric value {cell!r}",
                        row=row_idx,
                        column=feat.name,
                    ) from None
                if feat.kind == CATEGORICAL:
                    v = values[j]
                    if v != np.floor(v) or v < 0 or v > feat.category_count - 1:
                        raise CsvFormatError(
                            f"row {row_idx}, column {feat.name!r}: unknown categorical code {cell!r}"
                            f" (expected integer in [0, {feat.category_count - 1}])",
                            row=row_idx,
                            column=feat.name,
                        )
            cell = record[label_col].strip()
            try:
                lab = float(cell)
            except ValueError:
                raise CsvFormatError(
                    f"row {row_idx}, column {label_column!r}: non-numeric label {cell!r}",
                    row=row_idx,
                    column=label_column,
                ) from None
            if lab not in (0.0, 1.0):
                raise CsvFormatError(
                    f"row {row_idx}, column {label_column!r}: label must be 0 or 1, got {cell!r}",
                    row=row_idx,
                    column=label_column,
                )
            rows.append(values)
            labels.append(int(lab))

    if not rows:
        raise CsvFormatError("CSV has a header but no data rows")
    matrix = np.vstack(rows)
    labels_arr = np.asarray(labels, dtype=np.int64)
    if len(set(labels)) < 2:
        raise CsvFormatError(
            f"column {label_column!r} holds a single class ({labels[0]}); need both 0 and 1",
            column=label_column,
        )
    refreshed = schema.with_observed_bounds(matrix.min(axis=0), matrix.max(axis=0))
    return Dataset(refreshed, matrix, labels_arr)


def save_csv(dataset: Dataset, path, label_column: str = "label") -> None:
    """Write the dataset with a header row; floats use repr for exact round-trip."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.schema.names + [label_column])
        for row, lab in zip(dataset.rows, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(lab)])


def make_classification(
    n_samples: int, n_features: int, class_sep: float, seed: int
) -> Dataset:
    """Two isotropic Gaussian clusters with means ``class_sep`` apart.

    Cluster standard deviation is fixed at ``_CLUSTER_STD`` so ``class_sep``
    alone controls how separable the classes are.  Labels are balanced:
    ``n_samples // 2`` rows in class 0, the remainder in class 1.
    Deterministic for a fixed seed.
    """
    if n_samples < 4:
        raise ValueError(f"n_samples must be >= 4, got {n_samples}")
    if n_features < 1:
        raise ValueError(f"n_features must be >= 1, got {n_features}")
    if not class_sep > 0:
        raise ValueError(f"class_sep must be > 0, got {class_sep}")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(n_features)
    direction /= np.linalg.norm(direction)
    n0 = n_samples // 2
    n1 = n_samples - n0
    center0 = -0.5 * class_sep * direction
    center1 = 0.5 * class_sep * direction
    rows = np.concatenate(
        [
            center0 + _CLUSTER_STD * rng.standard_normal((n0, n_features)),
            center1 + _CLUSTER_STD * rng.standard_normal((n1, n_features)),
        ]
    )
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    order = rng.permutation(n_samples)
    rows, labels = rows[order], labels[order]
    schema = FeatureSchema.continuous_features([f"x{i}" for i in range(n_features)])
    schema = schema.with_observed_bounds(rows.min(axis=0), rows.max(axis=0))
    return Dataset(schema, rows, labels)


def toy_points() -> Dataset:
    """A fixed 20-point, 2-feature, two-cluster dataset for demos and plots.

    The values are this project's own; they were drawn once from two Gaussian
    clusters and frozen as literals.
    """
    rows = np.array(
        [
            [8.13, 10.91], [7.26, 9.48], [9.02, 11.62], [6.85, 10.22], [8.77, 9.05],
            [7.94, 11.18], [9.41, 10.03], [6.52, 9.77], [8.35, 8.64], [7.08, 10.55],
            [13.62, 19.38], [14.91, 20.74], [12.88, 18.52], [15.33, 19.91], [13.17, 21.06],
            [14.48, 18.87], [12.54, 20.33], [15.02, 21.41], [13.95, 17.96], [14.23, 20.12],
        ]
    )
    labels = np.array([0] * 10 + [1] * 10, dtype=np.int64)
    schema = FeatureSchema.continuous_features(["x1", "x2"])
    schema = schema.with_observed_bounds(rows.min(axis=0), rows.max(axis=0))
    return Dataset(schema, rows, labels)


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified shuffle split, deterministic per seed.

    Per class the train count is round(train_fraction * class_count); if either
    side would end up empty, one row of the largest class is moved across so
    both sides are non-empty.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        members = np.flatnonzero(dataset.labels == cls)
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        k = int(np.floor(train_fraction * members.size + 0.5))
        k = min(max(k, 0), members.size)
        train_idx.append(members[:k])
        test_idx.append(members[k:])
    train_idx = np.concatenate(train_idx) if train_idx else np.empty(0, dtype=np.int64)
    test_idx = np.concatenate(test_idx) if test_idx else np.empty(0, dtype=np.int64)

    def _rebalance(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # move one row of the majority class of `src` to the empty side
        counts = [np.sum(dataset.labels[src] == c) for c in (0, 1)]
        big = int(np.argmax(counts))
        pos = np.flatnonzero(dataset.labels[src] == big)[-1]
        return np.delete(src, pos), np.append(dst, src[pos])

    if test_idx.size == 0:
        train_idx, test_idx = _rebalance(train_idx, test_idx)
    if train_idx.size == 0:
        test_idx, train_idx = _rebalance(test_idx, train_idx)
    train_idx.sort()
    test_idx.sort()
    make = lambda idx: Dataset(dataset.schema, dataset.rows[idx], dataset.labels[idx])
    return make(train_idx), make(test_idx)


def feature_bounds(dataset: Dataset) -> list[tuple[float, float]]:
    """Exact per-feature (min, max) over all rows."""
    if dataset.n_samples < 1:
        raise ValueError("cannot compute bounds of an empty dataset")
    mins = dataset.rows.min(axis=0)
    maxs = dataset.rows.max(axis=0)
    return [(float(lo), float(hi)) for lo, hi in zip(mins, maxs)]


def standardize(dataset: Dataset) -> tuple[Dataset, np.ndarray, np.ndarray]:
    """Explicit z-score transform; never applied implicitly anywhere else.

    Returns the transformed dataset plus the (mean, std) vectors used.
    Zero-variance columns keep std 1 so the transform stays invertible.
    """
    mean = dataset.rows.mean(axis=0)
    std = dataset.rows.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    rows = (dataset.rows - mean) / std
    schema = dataset.schema.with_observed_bounds(rows.min(axis=0), rows.max(axis=0))
    return Dataset(schema, rows, dataset.labels), mean, std
