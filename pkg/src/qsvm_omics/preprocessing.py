"""log(1+v) + min-max scaling, PCA, and the [0, pi] angle rescaling.

Each step has a functional fit/apply pair and a scikit-learn transformer
wrapper, so the chain can be dropped into a ``Pipeline``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_matrix
from .data import Dataset


@dataclass(frozen=True)
class PreprocessState:
    """Statistics fitted on a training fold. Unfitted stages stay ``None``."""

    log_min: np.ndarray | None = None
    log_max: np.ndarray | None = None
    pca_mean: np.ndarray | None = None
    components: np.ndarray | None = None
    angle_min: np.ndarray | None = None
    angle_max: np.ndarray | None = None


def _log1p_checked(X) -> np.ndarray:
    X = check_matrix(X)
    if np.any(X < 0):
        raise ValueError("log-transform domain: negative values")
    return np.log1p(X)


def _scale_columns(L, lo, hi) -> np.ndarray:
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (L - lo) / safe, 0.0)


def fit_log_minmax(X, state: PreprocessState | None = None) -> PreprocessState:
    L = _log1p_checked(X)
    return replace(state or PreprocessState(), log_min=L.min(axis=0), log_max=L.max(axis=0))


def apply_log_minmax(state: PreprocessState, X) -> np.ndarray:
    """Training rows land in ``[0, 1]``; other rows may fall outside."""
    L = _log1p_checked(X)
    if L.shape[1] != state.log_min.shape[0]:
        raise ValueError(f"expected {state.log_min.shape[0]} features, got {L.shape[1]}")
    return _scale_columns(L, state.log_min, state.log_max)


def log_minmax_normalize(d: Dataset):
    """Normalize a cleaned dataset; returns ``(dataset, state)``.

    Constant columns map to 0.
    """
    state = fit_log_minmax(d.values)
    out = Dataset(d.sample_ids, d.labels, d.feature_names, apply_log_minmax(state, d.values))
    return out, state


def fit_pca(X, k: int, state: PreprocessState | None = None) -> PreprocessState:
    """Top-``k`` right singular directions of the centered matrix.

    Each component is sign-flipped so that its largest-magnitude entry is
    positive, making the basis reproducible across runs and platforms.
    """
    X = check_matrix(X)
    n, P = X.shape
    if not 1 <= k <= min(n, P):
        raise ValueError(f"k={k} must be between 1 and min(n, P)={min(n, P)}")
    mean = X.mean(axis=0)
    _, _, vt = np.linalg.svd(X - mean, full_matrices=False)
    comps = vt[:k].copy()
    lead = np.argmax(np.abs(comps), axis=1)
    comps *= np.sign(comps[np.arange(k), lead])[:, None]
    return replace(state or PreprocessState(), pca_mean=mean, components=comps)


def project_pca(state: PreprocessState, X) -> np.ndarray:
    X = check_matrix(X)
    if X.shape[1] != state.pca_mean.shape[0]:
        raise ValueError(f"expected {state.pca_mean.shape[0]} features, got {X.shape[1]}")
    return (X - state.pca_mean) @ state.components.T


def fit_angle_range(Z, state: PreprocessState | None = None) -> PreprocessState:
    Z = check_matrix(Z)
    return replace(state or PreprocessState(), angle_min=Z.min(axis=0), angle_max=Z.max(axis=0))


def rescale_to_angle_range(state: PreprocessState, Z) -> np.ndarray:
    """Map each column linearly onto ``[0, pi]`` and clamp; constant columns give 0."""
    Z = check_matrix(Z)
    if Z.shape[1] != state.angle_min.shape[0]:
        raise ValueError(f"expected {state.angle_min.shape[0]} columns, got {Z.shape[1]}")
    return np.clip(np.pi * _scale_columns(Z, state.angle_min, state.angle_max), 0.0, np.pi)


class LogMinMaxScaler(TransformerMixin, BaseEstimator):
    """``log(1 + v)`` followed by per-feature min-max scaling."""

    def fit(self, X, y=None):
        self.state_ = fit_log_minmax(X)
        self.n_features_in_ = self.state_.log_min.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "state_")
        return apply_log_minmax(self.state_, X)


class PCAProjector(TransformerMixin, BaseEstimator):
    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        self.state_ = fit_pca(X, self.n_components)
        self.components_ = self.state_.components
        self.mean_ = self.state_.pca_mean
        self.n_features_in_ = self.mean_.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "state_")
        return project_pca(self.state_, X)


class AngleRangeScaler(TransformerMixin, BaseEstimator):
    """Per-column linear map onto ``[0, pi]`` with clamping outside the fitted range."""

    def fit(self, X, y=None):
        self.state_ = fit_angle_range(X)
        self.n_features_in_ = self.state_.angle_min.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "state_")
        return rescale_to_angle_range(self.state_, X)
