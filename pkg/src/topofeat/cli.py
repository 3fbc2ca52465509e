"""Command-line surface: synth | extract | experiment | oracle.

Every subcommand is deterministic given its flags (timings aside); all
randomness flows from explicit --seed values.  Exit codes: 0 success,
2 usage error, 3 data error, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .checks import run_cubical_trials, run_gradient_trials, run_rips_trials
from .imaging import (DatasetManifest, ManifestRecord, read_manifest, save_pgm,
                      synth_texture, write_manifest)
from .pipeline import (ExperimentConfig, build_feature_matrix, read_features_csv,
                       run_experiment, shared_grids, split, subject_barcodes,
                       write_features_csv)
from .ulbp import parse_patterns

_SUBJECT_SEED_STRIDE = 100003  # distinct per-subject generator streams


def _cmd_synth(args) -> int:
    if args.n < 2 or args.n % 2 != 0:
        raise ValueError(f"--n must be an even number >= 2, got {args.n}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(args.n):
        class_id = "holes1" if i < args.n // 2 else "holes2"
        subject_id = f"{class_id}_{i:03d}"
        img = synth_texture(class_id, args.size, args.seed * _SUBJECT_SEED_STRIDE + i)
        filename = f"{subject_id}.pgm"
        (out / filename).write_bytes(save_pgm(img))
        records.append(ManifestRecord(subject_id, class_id, (filename,)))
    manifest_path = out / "manifest.jsonl"
    write_manifest(DatasetManifest(tuple(records)), manifest_path)
    print(f"wrote {args.n} images and {manifest_path}")
    return 0


def _cmd_extract(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = read_manifest(manifest_path)
    patterns = tuple(parse_patterns(args.patterns)) if args.patterns else ()
    cfg = ExperimentConfig(
        filtration=args.filtration, ulbp_patterns=patterns,
        vectorizer=args.vectorizer, combine=args.combine,
        gamma=args.gamma, levels=args.levels, r=args.r,
        test_fraction=args.test_frac,
        seed=args.split_seed if args.split_seed is not None else 0)

    t0 = time.perf_counter()
    subjects = [subject_barcodes(rec, manifest_path.parent, cfg.filtration, patterns)
                for rec in manifest.records]
    persist_s = time.perf_counter() - t0

    # grid bounds from the training split when a split seed is given,
    # otherwise from all subjects
    train_ids = None
    if args.split_seed is not None:
        ids = [r.id for r in manifest.records]
        labels = [r.label for r in manifest.records]
        train, _ = split(ids, labels, args.test_frac, args.split_seed)
        train_ids = set(train)
    grids = shared_grids(subjects, cfg.gamma, ids=train_ids)

    ids, labels, X, names = build_feature_matrix(subjects, cfg, grids)
    write_features_csv(args.out, ids, labels, X, names)
    print(f"wrote {X.shape[0]}x{X.shape[1]} feature matrix to {args.out} "
          f"(persistence {persist_s:.2f}s)")
    return 0


_TABLE_COLUMNS = ("Accuracy", "AUC", "Recall", "Prec.", "F1")


def format_metrics_table(rows: list[tuple[str, dict]]) -> str:
    """Rows of (method name, metrics dict) in the comparison-table layout."""
    lines = ["{:<32}".format("Method") + "".join(f"{c:>10}" for c in _TABLE_COLUMNS)]
    for name, m in rows:
        cells = (m["accuracy"], m["auc"], m["recall"], m["precision"], m["f1"])
        lines.append("{:<32}".format(name) + "".join(f"{v:>10.4f}" for v in cells))
    return "\n".join(lines)


def _cmd_experiment(args) -> int:
    ids, labels, X, names = read_features_csv(args.features)
    t0 = time.perf_counter()
    result = run_experiment(ids, labels, X, names,
                            classifier=args.classifier, selection=args.select,
                            test_fraction=args.test_frac, seed=args.seed)
    total_ms = round((time.perf_counter() - t0) * 1000.0, 3)
    result["timings_ms"]["total"] = total_ms
    report = {
        "version": __version__,
        "config": {
            "features": str(args.features),
            "classifier": args.classifier,
            "selection": args.select,
            "test_fraction": args.test_frac,
            "seed": args.seed,
        },
        **result,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    name = f"{Path(args.features).stem} {args.classifier}+{args.select}"
    print(format_metrics_table([(name, result["metrics"])]))
    print(f"report written to {args.out}")
    return 0


_ORACLE_DEFAULT_TRIALS = {"cubical": 200, "rips": 100, "gradients": 50}
_ORACLE_RUNNERS = {"cubical": run_cubical_trials, "rips": run_rips_trials,
                   "gradients": run_gradient_trials}


def _cmd_oracle(args) -> int:
    trials = args.trials if args.trials is not None else _ORACLE_DEFAULT_TRIALS[args.check]
    failures = _ORACLE_RUNNERS[args.check](trials, args.seed)
    if failures:
        for line in failures:
            print(f"MISMATCH {line}")
        print(f"{args.check}: {len(failures)}/{trials} trials failed")
        return 4
    print(f"{args.check}: {trials} trials ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topofeat",
        description="Persistence barcodes from grayscale images, five "
                    "vectorizations, and an aggregation-vs-concatenation "
                    "classification harness.")
    parser.add_argument("--version", action="version", version=f"topofeat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int, required=True, help="subject count (even, split across two classes)")
    p.add_argument("--size", type=int, default=64, help="image side length (>= 32)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("extract", help="compute a feature matrix from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--filtration", choices=["cubical", "rips"], required=True)
    p.add_argument("--patterns", default="", help="ULBP patterns for rips, e.g. G4R1,G5R2")
    p.add_argument("--vectorizer", choices=["bc", "ps", "es", "pl", "tc"], required=True)
    p.add_argument("--combine", choices=["aggregate", "concat"], required=True)
    p.add_argument("--gamma", type=int, default=100, help="curve sample count")
    p.add_argument("--levels", type=int, default=5, help="landscape levels")
    p.add_argument("--r", type=int, default=1, help="tropical coordinate scale")
    p.add_argument("--split-seed", type=int, default=None,
                   help="derive grid bounds from the training split of this seed")
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--out", required=True, help="feature CSV path")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("experiment", help="train and evaluate on a feature matrix")
    p.add_argument("--features", required=True, help="feature CSV from extract")
    p.add_argument("--classifier", choices=["logreg", "knn"], default="logreg")
    p.add_argument("--select", choices=["none", "lasso"], default="lasso")
    p.add_argument("--test-frac", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("oracle", help="randomized engine-vs-oracle equivalence trials")
    p.add_argument("--check", choices=["cubical", "rips", "gradients"], required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
