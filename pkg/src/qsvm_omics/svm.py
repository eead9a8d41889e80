"""Soft-margin kernel SVM trained by sequential minimal optimization.

The dual solved here is

    max  sum_i a_i - 1/2 sum_ij y_i y_j a_i a_j K_ij
    s.t. sum_i a_i y_i = 0,  0 <= a_i <= C * w(y_i)

with ``w`` the balanced class weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_matrix
from .kernels import GramMatrix, KernelSpec, cross_gram_matrix, gram_matrix, resolve_spec

_TAU = 1e-12


class ConvergenceError(RuntimeError):
    """SMO ran out of iterations; carries the best model found so far."""

    def __init__(self, message, model, max_violation):
        super().__init__(message)
        self.model = model
        self.max_violation = max_violation


@dataclass(frozen=True)
class TrainConfig:
    kkt_tolerance: float = 1e-3
    max_passes: int = 10_000
    alpha_threshold: float = 1e-8

    def __post_init__(self):
        if not (self.kkt_tolerance > 0 and self.max_passes > 0 and self.alpha_threshold > 0):
            raise ValueError("TrainConfig values must all be positive")


@dataclass(frozen=True)
class SvmProblem:
    gram: np.ndarray = field(repr=False)
    labels: np.ndarray
    box_upper: np.ndarray

    def __post_init__(self):
        K = self.gram.values if isinstance(self.gram, GramMatrix) else self.gram
        K = np.asarray(K, dtype=float)
        y = check_binary_labels(self.labels)
        box = np.asarray(self.box_upper, dtype=float)
        if K.shape != (y.shape[0], y.shape[0]):
            raise ValueError(f"gram shape {K.shape} does not match {y.shape[0]} labels")
        if box.shape != y.shape or not np.all(box > 0):
            raise ValueError("box_upper must be positive, one entry per sample")
        object.__setattr__(self, "gram", K)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "box_upper", box)

    @classmethod
    def from_c(cls, gram, labels, C: float, class_weight="balanced") -> "SvmProblem":
        """Problem with per-sample bounds ``C * weight(y_i)``."""
        y = check_binary_labels(labels)
        if not C > 0:
            raise ValueError(f"C must be positive, got {C}")
        if class_weight == "balanced":
            weights = compute_class_weights(y)
        elif class_weight is None:
            weights = {1: 1.0, -1: 1.0}
        else:
            weights = {int(k): float(v) for k, v in class_weight.items()}
        box = C * np.where(y > 0, weights[1], weights[-1])
        return cls(gram, y, box)

    def __len__(self):
        return self.labels.shape[0]


@dataclass(frozen=True)
class SvmModel:
    alphas: np.ndarray
    bias: float
    support_indices: np.ndarray
    labels: np.ndarray
    sample_ids: tuple = ()
    iterations: int = 0

    @property
    def dual_coef(self) -> np.ndarray:
        """``alpha_i * y_i``, the weights of the training columns in the decision function."""
        return self.alphas * self.labels


def compute_class_weights(labels) -> dict:
    """Balanced inverse-frequency weights ``n / (2 n_c)``."""
    y = check_binary_labels(labels)
    n = y.shape[0]
    return {c: n / (2.0 * np.count_nonzero(y == c)) for c in (1, -1)}


def dual_objective(alphas, labels, gram) -> float:
    a = np.asarray(alphas, dtype=float)
    ay = a * np.asarray(labels, dtype=float)
    return float(a.sum() - 0.5 * ay @ np.asarray(gram, dtype=float) @ ay)


def _bias(v, alphas, box, y, thr):
    """Offset from the free vectors, or the midpoint of the feasible interval."""
    free = (alphas > thr) & (alphas < box - thr)
    if np.any(free):
        return float(np.mean(v[free]))
    up = ((y > 0) & (alphas < box - thr)) | ((y < 0) & (alphas > thr))
    low = ((y > 0) & (alphas > thr)) | ((y < 0) & (alphas < box - thr))
    hi = np.max(v[up]) if np.any(up) else None
    lo = np.min(v[low]) if np.any(low) else None
    if hi is None:
        return float(lo)
    if lo is None:
        return float(hi)
    return 0.5 * float(hi + lo)


def _model(alphas, grad, problem, config, iterations, sample_ids=()):
    y = problem.labels
    v = -y * grad
    b = _bias(v, alphas, problem.box_upper, y, config.alpha_threshold)
    support = np.flatnonzero(alphas > config.alpha_threshold)
    alphas = alphas.copy()
    alphas.setflags(write=False)
    return SvmModel(alphas, b, support, y.copy(), tuple(sample_ids), iterations)


@njit(cache=True)
def _smo(Q, y, box, tol, max_iter):
    n = y.shape[0]
    alphas = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    converged = False
    while True:
        # Maximal violating index over I_up = {y=+1, a<C} U {y=-1, a>0}.
        i = -1
        gmax = -np.inf
        for t in range(n):
            if (y[t] > 0 and alphas[t] < box[t]) or (y[t] < 0 and alphas[t] > 0.0):
                vt = -y[t] * grad[t]
                if vt > gmax:
                    gmax = vt
                    i = t
        # Partner from I_low with the best second-order gain.
        j = -1
        vmin = np.inf
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alphas[t] > 0.0) or (y[t] < 0 and alphas[t] < box[t]):
                vt = -y[t] * grad[t]
                if vt < vmin:
                    vmin = vt
                if i >= 0:
                    diff = gmax - vt
                    if diff > 0.0:
                        quad = Q[i, i] + Q[t, t] - 2.0 * y[i] * y[t] * Q[i, t]
                        if quad <= 0.0:
                            quad = _TAU
                        gain = -(diff * diff) / quad
                        if gain < best:
                            best = gain
                            j = t
        if i < 0 or j < 0 or gmax - vmin < tol:
            converged = True
            break
        if it >= max_iter:
            break

        Ci = box[i]
        Cj = box[j]
        ai = alphas[i]
        aj = alphas[j]
        if y[i] != y[j]:
            q = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
            if q <= 0.0:
                q = _TAU
            delta = (-grad[i] - grad[j]) / q
            d = ai - aj
            ai += delta
            aj += delta
            if d > 0.0:
                if aj < 0.0:
                    aj = 0.0
                    ai = d
            elif ai < 0.0:
                ai = 0.0
                aj = -d
            if d > Ci - Cj:
                if ai > Ci:
                    ai = Ci
                    aj = Ci - d
            elif aj > Cj:
                aj = Cj
                ai = Cj + d
        else:
            q = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            if q <= 0.0:
                q = _TAU
            delta = (grad[i] - grad[j]) / q
            s = ai + aj
            ai -= delta
            aj += delta
            if s > Ci:
                if ai > Ci:
                    ai = Ci
                    aj = s - Ci
            elif aj < 0.0:
                aj = 0.0
                ai = s
            if s > Cj:
                if aj > Cj:
                    aj = Cj
                    ai = s - Cj
            elif ai < 0.0:
                ai = 0.0
                aj = s
        dai = ai - alphas[i]
        daj = aj - alphas[j]
        alphas[i] = ai
        alphas[j] = aj
        for t in range(n):
            grad[t] += Q[i, t] * dai + Q[j, t] * daj
        it += 1
    return alphas, grad, it, converged


def solve_dual(problem: SvmProblem, config: TrainConfig | None = None, sample_ids=()) -> SvmModel:
    """Solve the dual by SMO with second-order working-set selection.

    Each step picks the maximal violating index ``i`` and the partner ``j``
    giving the largest guaranteed objective gain, then solves the two-variable
    subproblem analytically. Selection is a pure function of the current
    iterate (first index wins ties), so runs are bit-reproducible. Stops once
    the KKT gap ``max_{I_up} -yG - min_{I_low} -yG`` drops below
    ``kkt_tolerance``.

    Raises:
        ConvergenceError: after ``max_passes * n`` steps without convergence.
    """
    config = config or TrainConfig()
    y = problem.labels.astype(float)
    Q = np.ascontiguousarray(problem.gram * np.outer(y, y))
    max_iter = config.max_passes * y.shape[0]
    alphas, grad, it, converged = _smo(
        Q, y, problem.box_upper, float(config.kkt_tolerance), max_iter
    )
    model = _model(alphas, grad, problem, config, it, sample_ids)
    if not converged:
        viol = max_kkt_violation(model, problem, config)
        raise ConvergenceError(
            f"SMO did not converge in {max_iter} steps (max violation {viol:.3g})",
            model,
            viol,
        )
    return model


def decision_values(model: SvmModel, cross) -> np.ndarray:
    """``f_j = sum_i alpha_i y_i cross[j, i] + bias``."""
    cross = np.atleast_2d(np.asarray(cross, dtype=float))
    if cross.shape[1] != model.alphas.shape[0]:
        raise ValueError(
            f"cross kernel has {cross.shape[1]} columns, model has {model.alphas.shape[0]} samples"
        )
    return cross @ model.dual_coef + model.bias


def max_kkt_violation(model: SvmModel, problem: SvmProblem, config: TrainConfig | None = None) -> float:
    """Largest margin-condition violation over the training set.

    With ``u_i = y_i f(x_i) - 1``: samples at ``alpha = 0`` need ``u >= 0``,
    samples at the upper bound need ``u <= 0``, free samples need ``u = 0``.
    """
    config = config or TrainConfig()
    if model.alphas.shape[0] != len(problem):
        raise ValueError("model and problem sizes differ")
    a = model.alphas
    thr = config.alpha_threshold
    u = problem.labels * decision_values(model, problem.gram) - 1.0
    lower = a <= thr
    upper = a >= problem.box_upper - thr
    viol = np.where(lower, np.maximum(0.0, -u), np.where(upper, np.maximum(0.0, u), np.abs(u)))
    return float(viol.max())


class KernelSVC(ClassifierMixin, BaseEstimator):
    """Binary SVM over any :class:`KernelSpec`, including the quantum kernels.

    Parameters
    ----------
    kernel : str or KernelSpec
        Kernel id (``"rbf"``, ``"poly"``, ``"angle"``, ``"pqk_zz"``, ...) or a spec.
    C : float
        Box constraint, multiplied per sample by the class weight.
    class_weight : "balanced" or None or dict
    gamma, degree, coef0, pqk_gamma, zz_reps
        Used when ``kernel`` is an id; ``gamma=None`` picks the RBF scale heuristic.
    tol, max_passes
        SMO stopping rule, see :class:`TrainConfig`.
    """

    def __init__(
        self,
        kernel="rbf",
        C=1.0,
        class_weight="balanced",
        gamma=None,
        degree=3,
        coef0=1.0,
        pqk_gamma=1.0,
        zz_reps=2,
        tol=1e-3,
        max_passes=10_000,
    ):
        self.kernel = kernel
        self.C = C
        self.class_weight = class_weight
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.pqk_gamma = pqk_gamma
        self.zz_reps = zz_reps
        self.tol = tol
        self.max_passes = max_passes

    def _spec(self) -> KernelSpec:
        if isinstance(self.kernel, KernelSpec):
            return self.kernel
        return KernelSpec.from_id(
            self.kernel,
            gamma=self.gamma,
            degree=self.degree,
            coef=self.coef0,
            pqk_gamma=self.pqk_gamma,
            zz_reps=self.zz_reps,
        )

    def fit(self, X, y):
        X = check_matrix(X)
        y = np.asarray(y)
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] != 2:
            raise ValueError(f"need exactly two classes, got {self.classes_.shape[0]}")
        y_pm = np.where(y == self.classes_[1], 1, -1)
        self.spec_ = resolve_spec(self._spec(), X)
        K = gram_matrix(self.spec_, X).values
        problem = SvmProblem.from_c(K, y_pm, self.C, self.class_weight)
        self.model_ = solve_dual(problem, TrainConfig(self.tol, self.max_passes))
        support = self.model_.support_indices
        self.support_ = support
        self.support_vectors_ = X[support]
        self.dual_coef_ = self.model_.dual_coef[support]
        self.intercept_ = self.model_.bias
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_matrix(X, n_features=self.n_features_in_)
        if self.support_.shape[0] == 0:
            return np.full(X.shape[0], self.intercept_)
        cross = cross_gram_matrix(self.spec_, X, self.support_vectors_)
        return cross @ self.dual_coef_ + self.intercept_

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]
