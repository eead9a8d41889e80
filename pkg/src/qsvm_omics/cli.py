"""Command line entry point: ``qsvm-omics {synth,rank,run}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .data import exclude_missing, generate_synthetic, load_dataset_csv, write_dataset_csv
from .experiment import ConfigError, ExperimentConfig, group_summary, run_experiment_matrix
from .preprocessing import log_minmax_normalize
from .ranking import RidgeRanker

log = logging.getLogger("qsvm_omics")


def cmd_synth(args) -> int:
    d = generate_synthetic(args.n, args.features, args.informative, args.sep, args.seed)
    write_dataset_csv(d, args.out)
    log.info("wrote %d x %d synthetic dataset to %s", d.n_samples, d.n_features, args.out)
    return 0


def cmd_rank(args) -> int:
    d = exclude_missing(load_dataset_csv(args.data))
    normalized, _ = log_minmax_normalize(d)
    ranker = RidgeRanker(
        lam=args.lam, n_groups=args.groups, n_repeats=args.reps, random_state=args.seed
    ).fit(normalized.values, d.y)
    group_of = ranker.groups_.group_of()
    stable = set()
    if args.reps > 1:
        for common in ranker.stability_.common:
            stable.update(common)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature_name", "coefficient", "abs_rank", "group", "stable"])
        for rank, j in enumerate(ranker.ranking_, start=1):
            writer.writerow([
                d.feature_names[j],
                f"{ranker.coef_[j]:.8g}",
                rank,
                group_of[j] + 1,
                int(args.reps <= 1 or j in stable),
            ])
    sizes = ranker.groups_.sizes()
    for g, size in enumerate(sizes, start=1):
        line = f"group {g}: {size} features"
        if args.reps > 1:
            line += f", {len(ranker.stability_.common[g - 1])} stable over {args.reps} repetitions"
        print(line)
    return 0


def _progress(i, n, rec):
    if rec.ok:
        log.info("[%d/%d] %s group=%d dim=%d qubits=%d C=%g AUC=%.3f (%.1fs)",
                 i, n, rec.kernel, rec.group, rec.pca_dim, rec.qubits, rec.c, rec.mean_auc, rec.seconds)
    else:
        log.warning("[%d/%d] %s group=%d dim=%d failed: %s",
                    i, n, rec.kernel, rec.group, rec.pca_dim, rec.error)


def cmd_run(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    manifest = run_experiment_matrix(config, args.out, progress=_progress)
    failed = sum(not r.ok for r in manifest.records)
    print(f"{manifest.total_conditions} conditions, {failed} failed, "
          f"{manifest.seconds:.1f}s; results in {Path(args.out) / 'results.csv'}")
    for g, auc in group_summary(manifest.records).items():
        print(f"group {g}: mean AUC over kernels and dims {auc:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsvm-omics", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic two-class dataset CSV")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--features", type=int, default=50)
    p.add_argument("--informative", type=int, default=5)
    p.add_argument("--sep", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("rank", help="ridge ranking report with rank groups")
    p.add_argument("--data", required=True)
    p.add_argument("--groups", type=int, default=4)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("run", help="run an experiment matrix from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
