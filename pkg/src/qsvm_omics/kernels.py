"""Classical and quantum kernels, Gram matrices, and closed-form oracles."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .quantum_state import (
    StateVector,
    ZzMapConfig,
    amplitude_qubits,
    encode_amplitude,
    encode_angle,
    encode_zz,
    reduced_density_matrices,
)

KINDS = ("rbf", "poly", "fidelity", "projected")
ENCODINGS = ("amplitude", "angle", "zz")

# Reporting order of the kernels, classical baselines first.
CLASSICAL_KERNEL_IDS = ("rbf", "poly")
QUANTUM_KERNEL_IDS = (
    "amplitude",
    "angle",
    "zz",
    "pqk_amplitude",
    "pqk_angle",
    "pqk_zz",
)
KERNEL_IDS = CLASSICAL_KERNEL_IDS + QUANTUM_KERNEL_IDS


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to evaluate and its hyperparameters.

    ``gamma`` is the RBF width for ``kind="rbf"`` (``None`` means "resolve
    from training data", see :func:`scale_gamma`) and the projected-kernel
    width for ``kind="projected"``.
    """

    kind: str
    encoding: str | None = None
    gamma: float | None = None
    degree: int = 3
    coef: float = 1.0
    zz: ZzMapConfig = field(default_factory=ZzMapConfig)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind in ("fidelity", "projected"):
            if self.encoding not in ENCODINGS:
                raise ValueError(f"unknown encoding {self.encoding!r}")
        elif self.encoding is not None:
            raise ValueError(f"{self.kind} kernel takes no encoding")
        if self.kind == "projected" and self.gamma is None:
            object.__setattr__(self, "gamma", 1.0)
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.kind == "poly" and (int(self.degree) != self.degree or self.degree < 1):
            raise ValueError(f"degree must be a positive integer, got {self.degree}")

    @classmethod
    def from_id(
        cls,
        kernel_id: str,
        *,
        gamma: float | None = None,
        degree: int = 3,
        coef: float = 1.0,
        pqk_gamma: float = 1.0,
        zz_reps: int = 2,
    ) -> "KernelSpec":
        """Build a spec from a short id such as ``"rbf"`` or ``"pqk_zz"``."""
        zz = ZzMapConfig(zz_reps)
        if kernel_id == "rbf":
            return cls("rbf", gamma=gamma)
        if kernel_id == "poly":
            return cls("poly", degree=degree, coef=coef)
        if kernel_id in ENCODINGS:
            return cls("fidelity", kernel_id, zz=zz)
        if kernel_id.startswith("pqk_") and kernel_id[4:] in ENCODINGS:
            return cls("projected", kernel_id[4:], gamma=pqk_gamma, zz=zz)
        raise ValueError(f"unknown kernel id {kernel_id!r}; expected one of {KERNEL_IDS}")

    @property
    def id(self) -> str:
        if self.kind in CLASSICAL_KERNEL_IDS:
            return self.kind
        if self.kind == "fidelity":
            return self.encoding
        return f"pqk_{self.encoding}"

    @property
    def is_quantum(self) -> bool:
        return self.kind in ("fidelity", "projected")

    def with_gamma(self, gamma: float) -> "KernelSpec":
        return replace(self, gamma=gamma)


def scale_gamma(X) -> float:
    """RBF width heuristic ``1 / (d * Var(X))``; falls back to 1 on constant data."""
    X = np.asarray(X, dtype=float)
    var = X.var()
    if not var > 0:
        return 1.0
    return 1.0 / (X.shape[1] * var)


def resolve_spec(spec: KernelSpec, X_train) -> KernelSpec:
    """Fill in a data-dependent RBF gamma, leaving every other spec untouched."""
    if spec.kind == "rbf" and spec.gamma is None:
        return spec.with_gamma(scale_gamma(X_train))
    return spec


def qubit_count(spec: KernelSpec, n_features: int) -> int:
    """Qubits the embedding engages for ``n_features`` inputs (0 if classical)."""
    if not spec.is_quantum:
        return 0
    if spec.encoding == "amplitude":
        return amplitude_qubits(n_features)
    return n_features


def encode(spec: KernelSpec, x) -> StateVector:
    """Embed ``x`` with the spec's quantum encoding."""
    if spec.encoding == "amplitude":
        return encode_amplitude(x)
    if spec.encoding == "angle":
        return encode_angle(x)
    if spec.encoding == "zz":
        return encode_zz(x, spec.zz)
    raise ValueError(f"{spec.kind} kernel has no quantum encoding")


def _embed(spec: KernelSpec, x) -> np.ndarray:
    if spec.kind == "fidelity":
        return encode(spec, x).amplitudes
    if spec.kind == "projected":
        return reduced_density_matrices(encode(spec, x)).per_qubit
    return np.asarray(x, dtype=float)


def _pair(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    if spec.kind == "fidelity":
        return float(abs(np.vdot(a, b)) ** 2)
    if spec.kind == "projected":
        d = (a - b).ravel()
        return float(np.exp(-spec.gamma * np.vdot(d, d).real))
    if spec.kind == "rbf":
        if spec.gamma is None:
            raise ValueError("RBF gamma is unresolved; call resolve_spec first")
        d = a - b
        return float(np.exp(-spec.gamma * (d @ d)))
    return float((a @ b + spec.coef) ** spec.degree)


def _check_dims(d1: int, d2: int):
    if d1 != d2:
        raise ValueError(f"dimension mismatch: {d1} vs {d2}")


def kernel_value(spec: KernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dims(x.shape[-1], y.shape[-1])
    return _pair(spec, _embed(spec, x), _embed(spec, y))


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric kernel matrix over one sample set."""

    values: np.ndarray = field(repr=False)
    spec: KernelSpec
    row_ids: tuple = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        ids = tuple(self.row_ids) if len(self.row_ids) else tuple(range(v.shape[0]))
        if len(ids) != v.shape[0]:
            raise ValueError("row_ids length does not match matrix size")
        object.__setattr__(self, "row_ids", ids)

    @property
    def shape(self):
        return self.values.shape

    def __len__(self):
        return self.values.shape[0]

    def check(self, tol: float = 1e-9) -> None:
        """Raise ``ValueError`` if any structural invariant is broken."""
        v = self.values
        if np.max(np.abs(v - v.T), initial=0.0) > tol:
            raise ValueError("Gram matrix is not symmetric")
        if self.spec.kind in ("rbf", "fidelity", "projected"):
            if np.max(np.abs(np.diag(v) - 1.0), initial=0.0) > tol:
                raise ValueError("Gram matrix diagonal is not 1")
        floor = {"fidelity": -1e-8, "projected": -1e-6}.get(self.spec.kind)
        if floor is not None and np.linalg.eigvalsh(v)[0] < floor:
            raise ValueError("Gram matrix is not positive semidefinite")

    def to_csv(self, path) -> None:
        """Row-major plain-text dump with 17 significant digits."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for row in self.values:
                writer.writerow([f"{v:.17g}" for v in row])


def read_gram_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def embed_rows(spec: KernelSpec, X) -> list:
    """Per-row kernel features: the raw row, its statevector, or its 1-RDM stack.

    Embedding once and passing the result to :func:`gram_from_embeddings` and
    :func:`cross_from_embeddings` avoids re-simulating the same rows.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return [_embed(spec, x) for x in X]


def _upper_row(spec, emb, i):
    return [_pair(spec, emb[i], emb[j]) for j in range(i, len(emb))]


def _cross_row(spec, a, emb_cols):
    return [_pair(spec, a, b) for b in emb_cols]


def _map_rows(fn, args, n_jobs):
    if n_jobs in (None, 1):
        return [fn(*a) for a in args]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(*a) for a in args)


def gram_from_embeddings(spec: KernelSpec, emb, n_jobs: int | None = None) -> np.ndarray:
    n = len(emb)
    if n < 1:
        raise ValueError("need at least one sample")
    rows = _map_rows(_upper_row, [(spec, emb, i) for i in range(n)], n_jobs)
    K = np.empty((n, n))
    for i, row in enumerate(rows):
        K[i, i:] = row
        K[i:, i] = row
    return K


def cross_from_embeddings(spec: KernelSpec, emb_rows, emb_cols, n_jobs: int | None = None) -> np.ndarray:
    rows = _map_rows(_cross_row, [(spec, a, emb_cols) for a in emb_rows], n_jobs)
    return np.array(rows, dtype=float).reshape(len(emb_rows), len(emb_cols))


def gram_matrix(
    spec: KernelSpec, X, row_ids: Sequence | None = None, n_jobs: int | None = None
) -> GramMatrix:
    """Pairwise kernel over the rows of ``X``.

    Only the upper triangle is evaluated and then mirrored, so the result is
    exactly symmetric. Entries are independent; ``n_jobs`` spreads rows over
    threads without changing any value.
    """
    K = gram_from_embeddings(spec, embed_rows(spec, X), n_jobs)
    return GramMatrix(K, spec, tuple(row_ids) if row_ids is not None else ())


def cross_gram_matrix(spec: KernelSpec, X_rows, X_cols, n_jobs: int | None = None) -> np.ndarray:
    """``K[i, j] = k(X_rows[i], X_cols[j])``."""
    X_rows = np.atleast_2d(np.asarray(X_rows, dtype=float))
    X_cols = np.atleast_2d(np.asarray(X_cols, dtype=float))
    _check_dims(X_rows.shape[1], X_cols.shape[1])
    return cross_from_embeddings(spec, embed_rows(spec, X_rows), embed_rows(spec, X_cols), n_jobs)


def angle_kernel_closed_form(x, y) -> float:
    """Fidelity of two angle-encoded product states, ``prod cos^2((x_i - y_i)/2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dims(x.shape[-1], y.shape[-1])
    return float(np.prod(np.cos((x - y) / 2.0) ** 2))
