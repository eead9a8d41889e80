"""Experiment matrix: kernels x PCA dimensions x feature groups, cross-validated AUC."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from . import __version__
from ._validation import check_binary_labels
from .data import Dataset, exclude_missing, generate_synthetic, load_dataset_csv, stratified_kfold_plan
from .kernels import (
    KERNEL_IDS,
    KernelSpec,
    cross_from_embeddings,
    embed_rows,
    encode,
    gram_from_embeddings,
    gram_matrix,
    resolve_spec,
)
from .preprocessing import (
    apply_log_minmax,
    fit_angle_range,
    fit_log_minmax,
    fit_pca,
    log_minmax_normalize,
    project_pca,
    rescale_to_angle_range,
)
from .ranking import FeatureGroups, fit_ridge, partition_groups, rank_features
from .svm import SvmProblem, TrainConfig, decision_values, solve_dual

logger = logging.getLogger(__name__)

DEFAULT_C_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4)
DEFAULT_PCA_DIMS = (2, 4, 8, 16)
RESULT_COLUMNS = ("kernel", "group", "pca_dim", "qubits", "c", "fold_aucs", "mean_auc", "error")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    n_samples: int = 200
    n_features: int = 50
    n_informative: int = 5
    class_sep: float = 2.0
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one run of the experiment matrix.

    Exactly one of ``data`` (CSV path) and ``synthetic`` must be set.
    ``groups`` are 1-based indices into the ``n_groups`` ridge rank groups.
    """

    data: str | None = None
    synthetic: SyntheticSpec | None = None
    n_groups: int = 4
    groups: tuple = (1,)
    ridge_lambda: float = 1.0
    pca_dims: tuple = DEFAULT_PCA_DIMS
    kernels: tuple = KERNEL_IDS
    c_grid: tuple = DEFAULT_C_GRID
    folds: int = 3
    inner_folds: int = 3
    seed: int = 0
    c_reuse: bool = True
    global_preprocess: bool = False
    rbf_gamma: float | None = None
    poly_degree: int = 3
    poly_coef: float = 1.0
    pqk_gamma: float = 1.0
    zz_reps: int = 2
    kkt_tolerance: float = 1e-3
    max_passes: int = 10_000

    def __post_init__(self):
        if (self.data is None) == (self.synthetic is None):
            raise ConfigError("set exactly one of 'data' and 'synthetic'")
        for name in ("groups", "pca_dims", "kernels", "c_grid"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.pca_dims or any(int(d) != d or d < 1 for d in self.pca_dims):
            raise ConfigError("pca_dims must be a nonempty list of positive integers")
        c = np.asarray(self.c_grid, dtype=float)
        if c.size == 0 or np.any(c <= 0) or np.any(np.diff(c) <= 0):
            raise ConfigError("c_grid must be positive and strictly increasing")
        unknown = set(self.kernels) - set(KERNEL_IDS)
        if unknown or not self.kernels:
            raise ConfigError(f"unknown kernels {sorted(unknown)}; choose from {KERNEL_IDS}")
        if not self.groups or any(not 1 <= g <= self.n_groups for g in self.groups):
            raise ConfigError(f"groups must lie in [1, {self.n_groups}]")
        if self.folds < 2 or self.inner_folds < 2:
            raise ConfigError("folds and inner_folds must be at least 2")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        raw = dict(raw)
        if raw.get("synthetic") is not None:
            syn = raw["synthetic"]
            syn_known = {f.name for f in dataclasses.fields(SyntheticSpec)}
            if not isinstance(syn, dict) or set(syn) - syn_known:
                raise ConfigError(f"synthetic accepts only {sorted(syn_known)}")
            raw["synthetic"] = SyntheticSpec(**syn)
        if raw.get("data") is not None and base_dir is not None:
            path = Path(raw["data"])
            raw["data"] = str(path if path.is_absolute() else base_dir / path)
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(raw, base_dir=path.parent)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def kernel_spec(self, kernel_id: str) -> KernelSpec:
        return KernelSpec.from_id(
            kernel_id,
            gamma=self.rbf_gamma,
            degree=self.poly_degree,
            coef=self.poly_coef,
            pqk_gamma=self.pqk_gamma,
            zz_reps=self.zz_reps,
        )

    @property
    def train_config(self) -> TrainConfig:
        return TrainConfig(self.kkt_tolerance, self.max_passes)

    def ordered_kernels(self) -> tuple:
        """Classical baselines first, then the quantum kernels in reporting order."""
        return tuple(k for k in KERNEL_IDS if k in self.kernels)


@dataclass
class ResultRecord:
    kernel: str
    group: int
    pca_dim: int
    qubits: int = 0
    c: float | None = None
    fold_cs: list = field(default_factory=list)
    fold_aucs: list = field(default_factory=list)
    mean_auc: float | None = None
    seconds: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def csv_row(self) -> list:
        def num(v):
            return "" if v is None else f"{v:.6f}"

        return [
            self.kernel,
            str(self.group),
            str(self.pca_dim),
            str(self.qubits),
            num(self.c),
            ";".join(f"{a:.6f}" for a in self.fold_aucs),
            num(self.mean_auc),
            "" if self.error is None else " ".join(self.error.split()),
        ]


@dataclass
class RunManifest:
    config: ExperimentConfig
    records: list
    total_conditions: int
    version: str = __version__
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "version": self.version,
            "total_conditions": self.total_conditions,
            "seconds": self.seconds,
            "records": [dataclasses.asdict(r) for r in self.records],
        }


def auc_score(scores, labels) -> float:
    """Area under the ROC curve as the Mann-Whitney statistic.

    ``(#{pos > neg} + 0.5 #{pos == neg}) / (n_pos n_neg)``, computed from
    average ranks.
    """
    s = np.asarray(scores, dtype=float)
    y = check_binary_labels(labels)
    if s.shape != y.shape:
        raise ValueError(f"{s.shape[0]} scores for {y.shape[0]} labels")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    pos = y > 0
    n_pos = int(pos.sum())
    n_neg = y.shape[0] - n_pos
    u = rankdata(s)[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _fit_score(K_train, y_train, K_test, C, train_config):
    problem = SvmProblem.from_c(K_train, y_train, C)
    model = solve_dual(problem, train_config)
    return decision_values(model, K_test)


def grid_scores_from_gram(K, y, c_grid, inner_folds, seed=0, train_config=None) -> list:
    """Mean inner-fold validation AUC per C; NaN where any fold fails to train."""
    y = check_binary_labels(y)
    plan = stratified_kfold_plan(y, inner_folds, seed)
    out = []
    for C in c_grid:
        aucs = []
        try:
            for tr, va in plan.splits():
                scores = _fit_score(K[np.ix_(tr, tr)], y[tr], K[np.ix_(va, tr)], C, train_config)
                aucs.append(auc_score(scores, y[va]))
            out.append(float(np.mean(aucs)))
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            logger.debug("C=%g failed: %s", C, exc)
            out.append(float("nan"))
    return out


def pick_c(c_grid, scores) -> float:
    """Best mean AUC; ties go to the smaller C."""
    best, best_c = -np.inf, None
    for C, s in sorted(zip(c_grid, scores)):
        if np.isfinite(s) and s > best:
            best, best_c = s, C
    if best_c is None:
        raise RuntimeError("every C candidate failed to train")
    return float(best_c)


def grid_search_c(X_train, y_train, spec: KernelSpec, c_grid=DEFAULT_C_GRID, inner_folds=3, seed=0,
                  train_config: TrainConfig | None = None) -> float:
    """Choose C by inner stratified cross-validation on one training split."""
    if len(c_grid) == 0:
        raise ValueError("C grid is empty")
    spec = resolve_spec(spec, X_train)
    K = gram_matrix(spec, X_train).values
    scores = grid_scores_from_gram(K, y_train, c_grid, inner_folds, seed, train_config)
    return pick_c(c_grid, scores)


def rank_groups(d: Dataset, n_groups: int, lam: float) -> FeatureGroups:
    """Ridge ranking on the globally normalized dataset, cut into ``n_groups``."""
    normalized, _ = log_minmax_normalize(d)
    model = fit_ridge(normalized.values, d.y.astype(float), lam)
    return partition_groups(rank_features(model), n_groups)


def _mode(values):
    counts = Counter(values)
    top = max(counts.values())
    return min(v for v, c in counts.items() if c == top)


class ExperimentRunner:
    """Holds the cleaned dataset, rank groups, fold plan and per-cell caches.

    Preprocessed fold matrices are cached per ``(group, pca_dim)`` and the RBF
    C chosen per fold is cached for C reuse by the quantum kernels.
    """

    def __init__(self, config: ExperimentConfig, dataset: Dataset | None = None):
        self.config = config
        if dataset is None:
            dataset = load_config_dataset(config)
        self.dataset = exclude_missing(dataset)
        self.y = self.dataset.y
        self.groups = rank_groups(self.dataset, config.n_groups, config.ridge_lambda)
        self.plan = stratified_kfold_plan(self.y, config.folds, config.seed)
        self._folds = {}
        self._rbf_cs = {}

    def group_columns(self, group: int) -> np.ndarray:
        return np.array(self.groups.groups[group - 1], dtype=int)

    def _prepare(self, group, pca_dim):
        key = (group, pca_dim)
        if key in self._folds:
            return self._folds[key]
        X = self.dataset.values[:, self.group_columns(group)]
        folds = []
        if self.config.global_preprocess:
            st = fit_log_minmax(X)
            st = fit_pca(apply_log_minmax(st, X), pca_dim, st)
            Z = project_pca(st, apply_log_minmax(st, X))
            T = rescale_to_angle_range(fit_angle_range(Z), Z)
            for tr, te in self.plan.splits():
                folds.append((tr, te, Z[tr], Z[te], T[tr], T[te]))
        else:
            for tr, te in self.plan.splits():
                st = fit_log_minmax(X[tr])
                A_tr, A_te = apply_log_minmax(st, X[tr]), apply_log_minmax(st, X[te])
                st = fit_pca(A_tr, pca_dim, st)
                Z_tr, Z_te = project_pca(st, A_tr), project_pca(st, A_te)
                st = fit_angle_range(Z_tr, st)
                T_tr, T_te = rescale_to_angle_range(st, Z_tr), rescale_to_angle_range(st, Z_te)
                folds.append((tr, te, Z_tr, Z_te, T_tr, T_te))
        self._folds[key] = folds
        return folds

    def _inner_seed(self, fold):
        return self.config.seed + 1 + fold

    def _grid_c(self, K, y, fold):
        cfg = self.config
        scores = grid_scores_from_gram(
            K, y, cfg.c_grid, cfg.inner_folds, self._inner_seed(fold), cfg.train_config
        )
        return pick_c(cfg.c_grid, scores)

    def rbf_c(self, group, pca_dim, fold) -> float:
        """Grid-searched C of the RBF baseline for one outer fold (cached)."""
        key = (group, pca_dim, fold)
        if key not in self._rbf_cs:
            tr, _, Z_tr, _, _, _ = self._prepare(group, pca_dim)[fold]
            spec = resolve_spec(self.config.kernel_spec("rbf"), Z_tr)
            K = gram_matrix(spec, Z_tr).values
            self._rbf_cs[key] = self._grid_c(K, self.y[tr], fold)
        return self._rbf_cs[key]

    def run_condition(self, kernel: str, group: int, pca_dim: int) -> ResultRecord:
        """Cross-validated AUC of one (kernel, group, pca_dim) cell.

        Failures are caught and stored on the record instead of raised.
        """
        cfg = self.config
        record = ResultRecord(kernel, group, pca_dim)
        start = time.perf_counter()
        try:
            base = cfg.kernel_spec(kernel)
            for f, (tr, te, Z_tr, Z_te, T_tr, T_te) in enumerate(self._prepare(group, pca_dim)):
                X_tr, X_te = (T_tr, T_te) if base.is_quantum else (Z_tr, Z_te)
                spec = resolve_spec(base, X_tr)
                if spec.is_quantum:
                    record.qubits = encode(spec, X_tr[0]).num_qubits
                emb_tr = embed_rows(spec, X_tr)
                K_tr = gram_from_embeddings(spec, emb_tr)
                if spec.is_quantum and cfg.c_reuse:
                    C = self.rbf_c(group, pca_dim, f)
                elif kernel == "rbf":
                    key = (group, pca_dim, f)
                    if key not in self._rbf_cs:
                        self._rbf_cs[key] = self._grid_c(K_tr, self.y[tr], f)
                    C = self._rbf_cs[key]
                else:
                    C = self._grid_c(K_tr, self.y[tr], f)
                K_te = cross_from_embeddings(spec, embed_rows(spec, X_te), emb_tr)
                scores = _fit_score(K_tr, self.y[tr], K_te, C, cfg.train_config)
                record.fold_cs.append(C)
                record.fold_aucs.append(auc_score(scores, self.y[te]))
            record.c = _mode(record.fold_cs)
            record.mean_auc = float(np.mean(record.fold_aucs))
        except Exception as exc:  # isolate one bad cell from the rest of the matrix
            logger.warning("condition %s/g%d/d%d failed: %s", kernel, group, pca_dim, exc)
            record.error = f"{type(exc).__name__}: {exc}"
            record.c, record.mean_auc = None, None
        record.seconds = time.perf_counter() - start
        return record

    def conditions(self):
        """Kernels in reporting order, then dimensions ascending, then groups ascending."""
        for kernel in self.config.ordered_kernels():
            for dim in sorted(self.config.pca_dims):
                for group in sorted(self.config.groups):
                    yield kernel, group, dim

    def run(self, progress=None) -> RunManifest:
        start = time.perf_counter()
        records = []
        conditions = list(self.conditions())
        for i, (kernel, group, dim) in enumerate(conditions):
            rec = self.run_condition(kernel, group, dim)
            records.append(rec)
            if progress is not None:
                progress(i + 1, len(conditions), rec)
        return RunManifest(
            self.config, records, len(conditions), seconds=time.perf_counter() - start
        )


def load_config_dataset(config: ExperimentConfig) -> Dataset:
    if config.data is not None:
        return load_dataset_csv(config.data)
    s = config.synthetic
    return generate_synthetic(s.n_samples, s.n_features, s.n_informative, s.class_sep, s.seed)


def run_condition(config: ExperimentConfig, kernel: str, group: int, pca_dim: int,
                  dataset: Dataset | None = None) -> ResultRecord:
    return ExperimentRunner(config, dataset).run_condition(kernel, group, pca_dim)


def run_experiment_matrix(config: ExperimentConfig, out_dir=None, dataset: Dataset | None = None,
                          progress=None) -> RunManifest:
    """Run every condition; optionally write ``results.csv`` and ``manifest.json``."""
    manifest = ExperimentRunner(config, dataset).run(progress)
    if out_dir is not None:
        write_results(manifest, out_dir)
    return manifest


def write_results(manifest: RunManifest, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for rec in manifest.records:
            writer.writerow(rec.csv_row())
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")


def group_summary(records) -> dict:
    """Mean AUC per group over the successful records."""
    by_group = {}
    for r in records:
        if r.ok:
            by_group.setdefault(r.group, []).append(r.mean_auc)
    return {g: float(np.mean(v)) for g, v in sorted(by_group.items())}

