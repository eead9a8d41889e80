"""Ridge-coefficient feature ranking and rank-group partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_matrix


@dataclass(frozen=True)
class RidgeModel:
    coefficients: np.ndarray
    intercept: float
    lam: float


@dataclass(frozen=True)
class FeatureGroups:
    """Contiguous rank blocks; ``groups[0]`` holds the top-ranked features."""

    groups: tuple

    @property
    def group_count(self) -> int:
        return len(self.groups)

    @property
    def n_features(self) -> int:
        return sum(len(g) for g in self.groups)

    def sizes(self) -> tuple:
        return tuple(len(g) for g in self.groups)

    def group_of(self) -> np.ndarray:
        """Group index (0-based) of every feature."""
        out = np.empty(self.n_features, dtype=int)
        for g, idx in enumerate(self.groups):
            out[list(idx)] = g
        return out


@dataclass(frozen=True)
class StabilityResult:
    common: tuple
    repetition_count: int


def ridge_objective(X, y, beta, lam) -> float:
    """``||y - X beta||^2 + lam ||beta||^2``."""
    r = np.asarray(y, float) - np.asarray(X, float) @ beta
    return float(r @ r + lam * beta @ beta)


def fit_ridge(X, y, lam: float = 1.0, fit_intercept: bool = True) -> RidgeModel:
    """Minimize ``||y - X beta||^2 + lam ||beta||^2``.

    With ``fit_intercept`` the problem is solved on column-centered ``X`` and
    centered ``y`` and the intercept is left unpenalized. The solve is a
    least-squares fit of the augmented system ``[X; sqrt(lam) I] beta = [y; 0]``,
    which for ``lam = 0`` yields the minimum-norm solution.
    """
    X = check_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} values")
    if X.shape[0] < 2:
        raise ValueError("need at least two samples")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if fit_intercept:
        x_mean = X.mean(axis=0)
        y_mean = y.mean()
        Xc, yc = X - x_mean, y - y_mean
    else:
        Xc, yc = X, y
    P = X.shape[1]
    if lam > 0:
        A = np.vstack([Xc, np.sqrt(lam) * np.eye(P)])
        b = np.concatenate([yc, np.zeros(P)])
    else:
        A, b = Xc, yc
    beta = np.linalg.lstsq(A, b, rcond=None)[0]
    intercept = float(y_mean - x_mean @ beta) if fit_intercept else 0.0
    return RidgeModel(beta, intercept, float(lam))


def rank_features(model: RidgeModel) -> np.ndarray:
    """Feature indices by descending ``|coefficient|``, ties to the lower index."""
    mag = np.abs(np.asarray(model.coefficients, dtype=float))
    return np.lexsort((np.arange(mag.shape[0]), -mag))


def partition_groups(ranking, group_count: int) -> FeatureGroups:
    """Split a ranking into ``group_count`` contiguous blocks.

    The first ``P mod G`` blocks get ``ceil(P/G)`` features, the rest ``floor(P/G)``.
    """
    ranking = np.asarray(ranking, dtype=int)
    P = ranking.shape[0]
    if not 1 <= group_count <= P:
        raise ValueError(f"group_count must be in [1, {P}], got {group_count}")
    base, extra = divmod(P, group_count)
    groups, start = [], 0
    for g in range(group_count):
        size = base + (1 if g < extra else 0)
        groups.append(tuple(int(i) for i in ranking[start : start + size]))
        start += size
    return FeatureGroups(tuple(groups))


def stable_common_features(groupings) -> StabilityResult:
    """Per group, the features found in that group in every repetition."""
    groupings = list(groupings)
    if not groupings:
        raise ValueError("need at least one grouping")
    first = groupings[0]
    for g in groupings[1:]:
        if g.group_count != first.group_count or g.n_features != first.n_features:
            raise ValueError("groupings differ in feature or group count")
    common = []
    for k in range(first.group_count):
        keep = set(first.groups[k])
        for g in groupings[1:]:
            keep &= set(g.groups[k])
        common.append(tuple(sorted(keep)))
    return StabilityResult(tuple(common), len(groupings))


def stratified_subsample(labels, fraction: float, seed: int) -> np.ndarray:
    """Sorted indices of a label-stratified random subsample."""
    y = np.asarray(labels)
    rng = np.random.default_rng(seed)
    keep = []
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        m = max(1, int(round(fraction * idx.shape[0])))
        keep.append(rng.permutation(idx)[:m])
    return np.sort(np.concatenate(keep))


def repeated_groupings(X, y, lam, group_count, reps=5, seed=0, fraction=0.8):
    """Refit on ``reps`` stratified subsamples (seeds ``seed .. seed+reps-1``)."""
    out = []
    for r in range(reps):
        idx = stratified_subsample(y, fraction, seed + r)
        model = fit_ridge(X[idx], np.asarray(y, float)[idx], lam)
        out.append(partition_groups(rank_features(model), group_count))
    return out


class RidgeRanker(BaseEstimator):
    """Rank features by ridge coefficient magnitude and split them into groups.

    Attributes set by ``fit``: ``coef_``, ``intercept_``, ``ranking_``,
    ``groups_`` (a :class:`FeatureGroups`), and, when ``n_repeats > 1``,
    ``stability_`` (a :class:`StabilityResult`).
    """

    def __init__(self, lam=1.0, n_groups=4, n_repeats=1, subsample=0.8, random_state=0):
        self.lam = lam
        self.n_groups = n_groups
        self.n_repeats = n_repeats
        self.subsample = subsample
        self.random_state = random_state

    def fit(self, X, y):
        X = check_matrix(X)
        y = check_binary_labels(y).astype(float)
        model = fit_ridge(X, y, self.lam)
        self.coef_ = model.coefficients
        self.intercept_ = model.intercept
        self.ranking_ = rank_features(model)
        self.groups_ = partition_groups(self.ranking_, self.n_groups)
        if self.n_repeats > 1:
            reps = repeated_groupings(
                X, y, self.lam, self.n_groups, self.n_repeats, self.random_state, self.subsample
            )
            self.stability_ = stable_common_features(reps)
        self.n_features_in_ = X.shape[1]
        return self

    def group_features(self, group: int) -> np.ndarray:
        """Column indices of 1-based ``group``, in rank order."""
        check_is_fitted(self, "groups_")
        if not 1 <= group <= self.groups_.group_count:
            raise ValueError(f"group must be in [1, {self.groups_.group_count}], got {group}")
        return np.array(self.groups_.groups[group - 1], dtype=int)
