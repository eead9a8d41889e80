"""Input validation shared by the estimators and functional API."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array


def check_matrix(X, n_features: int | None = None, allow_nan: bool = False) -> np.ndarray:
    """2-D float array, finite unless ``allow_nan``; optionally a fixed width."""
    X = check_array(
        X,
        dtype=np.float64,
        ensure_all_finite="allow-nan" if allow_nan else True,
        ensure_min_samples=1,
    )
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    return X


def check_binary_labels(labels) -> np.ndarray:
    """Labels as an int array of -1/+1 containing both classes."""
    y = np.asarray(labels)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {y.shape}")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    y = y.astype(int)
    if np.all(y == y[0]):
        raise ValueError("labels contain a single class")
    return y
