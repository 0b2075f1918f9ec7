"""Tabular datasets: CSV ingestion, label encoding, min-max scaling, splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass(frozen=True)
class Dataset:
    """Numeric feature matrix plus a binary label column.

    ``scaling_params`` is a ``(d, 2)`` array of per-column (min, max) of the
    data the features were scaled from, or ``None`` for unscaled data.
    """

    feature_names: tuple
    features: np.ndarray
    labels: np.ndarray
    label_name: str = "label"
    scaling_params: np.ndarray | None = None

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, copy=True)
        if features.ndim == 1 and features.size == 0:
            features = features.reshape(0, len(self.feature_names))
        if features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        labels = np.asarray(self.labels)
        if labels.shape != (features.shape[0],):
            raise DataError(f"{features.shape[0]} rows but {labels.shape} labels")
        if labels.size and not np.all((labels == 0) | (labels == 1)):
            raise DataError("labels must be 0 or 1")
        labels = labels.astype(np.int64)
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != features.shape[1]:
            raise DataError(f"{len(names)} feature names for {features.shape[1]} columns")
        params = self.scaling_params
        if params is not None:
            params = np.array(params, dtype=np.float64, copy=True)
            if params.shape != (features.shape[1], 2):
                raise DataError("scaling_params must hold one (min, max) pair per feature")
            params.setflags(write=False)
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "scaling_params", params)

    @property
    def n_rows(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def __len__(self):
        return self.n_rows

    @property
    def columns(self):
        return self.feature_names + (self.label_name,)

    def matrix(self):
        """Features with the label appended as the last column."""
        return np.hstack([self.features, self.labels[:, None].astype(np.float64)])

    def take(self, index):
        index = np.asarray(index)
        return Dataset(self.feature_names, self.features[index], self.labels[index],
                       self.label_name, self.scaling_params)

    def replace(self, features=None, labels=None):
        return Dataset(
            self.feature_names,
            self.features if features is None else features,
            self.labels if labels is None else labels,
            self.label_name,
            self.scaling_params,
        )

    def with_matrix(self, matrix):
        """A dataset shaped like this one from a ``features + label`` matrix."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != self.n_features + 1:
            raise DataError(f"expected {self.n_features + 1} columns, got {matrix.shape}")
        return self.replace(features=matrix[:, :-1], labels=matrix[:, -1].astype(np.int64))

    def counts(self):
        ones = int(self.labels.sum())
        return self.n_rows - ones, ones

    def equals(self, other):
        return (
            self.columns == other.columns
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


def concat(first, *others):
    if not others:
        return first
    for o in others:
        if o.columns != first.columns:
            raise DataError("cannot concatenate datasets with different columns")
    return first.replace(
        features=np.vstack([first.features] + [o.features for o in others]),
        labels=np.concatenate([first.labels] + [o.labels for o in others]),
    )


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset


def parse_label_mapping(text):
    """``"B=0,M=1"`` -> ``{"B": 0, "M": 1}``."""
    mapping = {}
    if not text:
        return mapping
    for item in text.split(","):
        if "=" not in item:
            raise DataError(f"label mapping entry {item!r} is not of the form from=to")
        key, value = item.split("=", 1)
        value = value.strip()
        if value not in ("0", "1"):
            raise DataError(f"label mapping target {value!r} must be 0 or 1")
        mapping[key.strip()] = int(value)
    return mapping


def _data_lines(handle):
    for lineno, line in enumerate(handle, start=1):
        if line.startswith("#") or not line.strip():
            continue
        yield lineno, line


def load_csv(path, label_column, label_mapping=None, drop_columns=(), ignore_missing_drops=False):
    """Read a headed, comma-separated file of numeric columns.

    Lines starting with ``#`` are provenance comments and are skipped.
    Textual labels are translated through ``label_mapping``; numeric labels
    must already be 0 or 1. Naming an absent column in ``drop_columns`` is
    an error unless ``ignore_missing_drops`` is set.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    mapping = dict(label_mapping or {})
    with path.open(newline="", encoding="utf-8") as handle:
        numbered = list(_data_lines(handle))
    if not numbered:
        raise DataError(f"{path}: no header row")
    linenos = [n for n, _ in numbered]
    rows = list(csv.reader(line for _, line in numbered))
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not in header {header}")
    missing = [c for c in drop_columns if c not in header]
    if missing and not ignore_missing_drops:
        raise DataError(f"{path}: cannot drop unknown columns {missing}")
    label_idx = header.index(label_column)
    keep = [i for i, h in enumerate(header) if i != label_idx and h not in drop_columns]
    names = tuple(header[i] for i in keep)

    n = len(rows) - 1
    features = np.empty((n, len(keep)), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    for r, (lineno, row) in enumerate(zip(linenos[1:], rows[1:])):
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for c, i in enumerate(keep):
            cell = row[i].strip()
            try:
                features[r, c] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: non-numeric value {cell!r} in column {header[i]!r}"
                ) from None
        labels[r] = _parse_label(row[label_idx].strip(), mapping, path, lineno)
    if not np.all(np.isfinite(features)):
        bad_r, bad_c = np.argwhere(~np.isfinite(features))[0]
        raise DataError(
            f"{path}:{linenos[bad_r + 1]}: non-finite value in column {names[bad_c]!r}"
        )
    return Dataset(names, features, labels, label_column)


def _parse_label(cell, mapping, path, lineno):
    if cell in mapping:
        return mapping[cell]
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"{path}:{lineno}: label {cell!r} has no mapping") from None
    if value not in (0.0, 1.0):
        raise DataError(f"{path}:{lineno}: label {cell!r} is not 0 or 1")
    return int(value)


def format_provenance(provenance):
    return "# " + "; ".join(f"{k}={v}" for k, v in provenance.items())


def write_csv(dataset, path, provenance=None):
    """Write ``dataset`` with the label as the last column.

    Floats use ``repr`` so reading the file back is value-exact.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        if provenance:
            handle.write(format_provenance(provenance) + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(dataset.columns)
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
    return path


def minmax_params(features):
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] == 0:
        raise DataError("cannot compute scaling parameters of an empty dataset")
    return np.column_stack([features.min(axis=0), features.max(axis=0)])


def apply_minmax(features, params):
    """``(x - min) / (max - min)`` per column; constant columns map to 0."""
    features = np.asarray(features, dtype=np.float64)
    lo, hi = params[:, 0], params[:, 1]
    span = hi - lo
    constant = span == 0
    safe = np.where(constant, 1.0, span)
    scaled = (features - lo) / safe
    scaled[:, constant] = 0.0
    return scaled


def invert_minmax(features, params):
    lo, hi = params[:, 0], params[:, 1]
    return np.asarray(features, dtype=np.float64) * (hi - lo) + lo


def minmax_scale(dataset):
    """Scale every feature column of ``dataset`` onto [0, 1]."""
    if dataset.n_rows == 0:
        return dataset
    params = minmax_params(dataset.features)
    scaled = np.clip(apply_minmax(dataset.features, params), 0.0, 1.0)
    return Dataset(dataset.feature_names, scaled, dataset.labels, dataset.label_name, params)


def train_rows(n, train_fraction=0.7):
    # the guard absorbs representation error, e.g. 0.7 * 20 = 13.999999999999998
    return int(math.floor(train_fraction * n + 1e-9))


def split_sequential(dataset, train_fraction=0.7):
    """First ``floor(fraction * n)`` rows train, the rest test; no shuffling."""
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train fraction must lie in (0, 1), got {train_fraction}")
    if dataset.n_rows < 2:
        raise DataError("need at least two rows to split")
    k = min(max(train_rows(dataset.n_rows, train_fraction), 1), dataset.n_rows - 1)
    idx = np.arange(dataset.n_rows)
    return SplitPair(dataset.take(idx[:k]), dataset.take(idx[k:]))


def filter_by_label(dataset, label):
    return dataset.take(np.nonzero(dataset.labels == label)[0])


def cap_majority(dataset, cap, seed):
    """Keep every minority row and a random ``cap`` majority rows, in file order."""
    neg, pos = dataset.counts()
    if neg == 0 or pos == 0:
        raise DataError("capping needs both classes present")
    majority = 0 if neg >= pos else 1
    maj_idx = np.nonzero(dataset.labels == majority)[0]
    if cap >= maj_idx.size:
        return dataset
    rng = np.random.default_rng(seed)
    chosen = rng.choice(maj_idx, size=cap, replace=False)
    keep = np.sort(np.concatenate([chosen, np.nonzero(dataset.labels != majority)[0]]))
    return dataset.take(keep)
