"""Dataset container, CSV I/O, missing-value policy, fold planning, synthetic data."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

LABEL_VALUES = {"0": -1, "-1": -1, "1": 1, "+1": 1}


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Samples x features matrix with +/-1 labels; NaN marks a missing cell."""

    sample_ids: tuple
    labels: np.ndarray = field(repr=False)
    feature_names: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=float)
        values = np.asarray(self.values, dtype=float)
        n = len(self.sample_ids)
        if labels.shape != (n,):
            raise ValueError(f"{labels.shape[0]} labels for {n} samples")
        if values.shape != (n, len(self.feature_names)):
            raise ValueError(
                f"values shape {values.shape} does not match {n} samples x "
                f"{len(self.feature_names)} features"
            )
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def y(self) -> np.ndarray:
        """Labels as ints; only valid once missing labels are gone."""
        if np.any(np.isnan(self.labels)):
            raise ValueError("dataset has missing labels")
        return self.labels.astype(int)

    def has_missing(self) -> bool:
        return bool(np.isnan(self.labels).any() or np.isnan(self.values).any())

    def select_features(self, columns) -> "Dataset":
        columns = np.asarray(columns, dtype=int)
        return Dataset(
            self.sample_ids,
            self.labels,
            tuple(self.feature_names[c] for c in columns),
            self.values[:, columns],
        )

    def select_samples(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(
            tuple(self.sample_ids[r] for r in rows),
            self.labels[rows],
            self.feature_names,
            self.values[rows],
        )


def _parse_label(cell: str, lineno: int) -> float:
    cell = cell.strip()
    if cell == "":
        return np.nan
    if cell not in LABEL_VALUES:
        raise DatasetFormatError(f"line {lineno}: label {cell!r} not in {{0, 1, -1, +1}}")
    return float(LABEL_VALUES[cell])


def load_dataset_csv(path) -> Dataset:
    """Read a ``sample_id,label,<features...>`` CSV. Empty cells become NaN."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "sample_id" or header[1] != "label":
            raise DatasetFormatError(
                f"{path}: header must start with 'sample_id,label' and name at least one feature"
            )
        features = header[2:]
        if len(set(features)) != len(features):
            raise DatasetFormatError(f"{path}: duplicate feature names")
        ids, labels, rows, seen = [], [], [], set()
        raw_labels = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetFormatError(
                    f"line {lineno}: expected {len(header)} cells, got {len(row)}"
                )
            sid = row[0]
            if sid in seen:
                raise DatasetFormatError(f"line {lineno}: duplicate sample id {sid!r}")
            seen.add(sid)
            ids.append(sid)
            labels.append(_parse_label(row[1], lineno))
            raw_labels.add(row[1].strip())
            values = []
            for name, cell in zip(features, row[2:]):
                cell = cell.strip()
                if cell == "":
                    values.append(np.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DatasetFormatError(
                        f"line {lineno}: non-numeric value {cell!r} for {name}"
                    ) from None
            rows.append(values)
    if {"0", "-1"} <= raw_labels:
        raise DatasetFormatError(f"{path}: labels mix the 0/1 and -1/+1 conventions")
    values = np.array(rows, dtype=float).reshape(len(ids), len(features))
    return Dataset(tuple(ids), np.array(labels), tuple(features), values)


def _fmt(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def write_dataset_csv(d: Dataset, path) -> None:
    """Write ``d`` in the schema read by :func:`load_dataset_csv` (labels as 0/1)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id", "label", *d.feature_names])
        for sid, lab, row in zip(d.sample_ids, d.labels, d.values):
            label = "" if np.isnan(lab) else ("1" if lab > 0 else "0")
            writer.writerow([sid, label, *(_fmt(v) for v in row)])


def exclude_missing(d: Dataset) -> Dataset:
    """Drop samples without a label, then every feature with a missing value."""
    d = d.select_samples(np.flatnonzero(~np.isnan(d.labels)))
    keep = np.flatnonzero(~np.isnan(d.values).any(axis=0))
    if keep.shape[0] == 0:
        raise ValueError("no usable features")
    if keep.shape[0] == d.n_features:
        return d
    return d.select_features(keep)


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def splits(self):
        """Yield ``(train_idx, test_idx)`` per fold, both sorted."""
        for f in range(self.k):
            test = self.folds[f]
            train = np.sort(np.concatenate([self.folds[g] for g in range(self.k) if g != f]))
            yield train, test


def stratified_kfold_plan(labels, k: int, seed: int = 0) -> FoldPlan:
    """Shuffle each class by ``seed`` and deal it round-robin over ``k`` folds.

    The dealing position carries over from one class to the next so fold
    sizes stay balanced as well as class counts.
    """
    y = np.asarray(labels)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    classes, counts = np.unique(y, return_counts=True)
    if np.any(counts < k):
        raise ValueError(f"class with {counts.min()} members is smaller than k={k}")
    rng = np.random.default_rng(seed)
    buckets = [[] for _ in range(k)]
    pos = 0
    for c in classes:
        for idx in rng.permutation(np.flatnonzero(y == c)):
            buckets[pos % k].append(int(idx))
            pos += 1
    return FoldPlan(tuple(np.sort(np.array(b, dtype=int)) for b in buckets), seed)


def generate_synthetic(
    n_samples: int = 200,
    n_features: int = 50,
    n_informative: int = 5,
    class_sep: float = 2.0,
    seed: int = 0,
) -> Dataset:
    """Two Gaussian classes whose means differ by ``class_sep`` on the first
    ``n_informative`` features; the remaining features are pure noise.

    Classes are balanced (the extra sample of an odd ``n_samples`` is positive)
    and rows are shuffled. The whole matrix is shifted so its minimum is 0,
    which keeps it inside the log-transform domain.
    """
    if n_samples < 4 or n_features < 1:
        raise ValueError("need n_samples >= 4 and n_features >= 1")
    if not 0 <= n_informative <= n_features:
        raise ValueError("n_informative must be in [0, n_features]")
    if class_sep < 0:
        raise ValueError("class_sep must be nonnegative")
    rng = np.random.default_rng(seed)
    n_pos = n_samples - n_samples // 2
    y = rng.permutation(np.r_[np.ones(n_pos), -np.ones(n_samples // 2)])
    Z = rng.standard_normal((n_samples, n_features))
    Z[:, :n_informative] += 0.5 * class_sep * y[:, None]
    Z -= Z.min()
    width = len(str(n_features - 1))
    ids = tuple(f"s{i:0{len(str(n_samples - 1))}d}" for i in range(n_samples))
    names = tuple(f"f{j:0{width}d}" for j in range(n_features))
    return Dataset(ids, y, names, Z)
