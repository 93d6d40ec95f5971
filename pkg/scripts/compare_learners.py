#!/usr/bin/env python3
"""Run the standard learner line-up on one stream and print final G-means.

Examples:
    python scripts/compare_learners.py --dataset sine --imbalance 0.01 --reps 10
    python scripts/compare_learners.py --dataset sine --drift posterior --drift-step 2500 --noise 0.1
    python scripts/compare_learners.py --dataset csv --csv-path german.csv --label-col bad --reps 50 \\
        --learners AREBA_20 AdaptiveCS Sliding Baseline
"""
import argparse
import math
import time
from pathlib import Path

from areba.bench import ExperimentConfig, run_experiment, write_csv
from areba.stream import ConceptSpec, DriftSpec, StreamConfig

LINEUP = {
    "AREBA_20": dict(learner="areba", memory=20),
    "AREBA_2": dict(learner="areba", memory=2),
    "QBR_20": dict(learner="qbr", memory=20),
    "OOB": dict(learner="oob", ensemble=20),
    "OOB_single": dict(learner="oob", ensemble=1),
    "AdaptiveCS": dict(learner="adaptive_cs"),
    "Sliding": dict(learner="sliding", window=100),
    "Baseline": dict(learner="baseline"),
}
DEFAULT = ["AREBA_20", "AREBA_2", "OOB_single", "AdaptiveCS", "Sliding", "Baseline"]


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--dataset", choices=["circle", "sine", "sea", "csv"], default="sine")
    p.add_argument("--csv-path")
    p.add_argument("--label-col")
    p.add_argument("--imbalance", type=float, default=0.01)
    p.add_argument("--drift", choices=["none", "prior", "likelihood", "posterior"], default="none")
    p.add_argument("--drift-step", type=int, default=2500)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--learners", nargs="+", choices=sorted(LINEUP), default=DEFAULT)
    p.add_argument("--out-dir", type=Path, help="write one result CSV per learner here")
    args = p.parse_args(argv)
    if args.dataset == "csv" and not (args.csv_path and args.label_col):
        p.error("--dataset csv needs --csv-path and --label-col")
    return args


def main(argv=None):
    args = parse_args(argv)
    if args.dataset == "csv":
        source = dict(csv_path=args.csv_path, label_col=args.label_col)
    else:
        drift = DriftSpec(args.drift, args.drift_step if args.drift != "none" else 0)
        stream = StreamConfig(ConceptSpec(args.dataset), args.imbalance, drift, args.noise, steps=args.steps)
        source = dict(stream=stream)
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for name in args.learners:
        start = time.perf_counter()
        cfg = ExperimentConfig(reps=args.reps, seed=args.seed, jobs=args.jobs, **source, **LINEUP[name])
        result = run_experiment(cfg)
        mean, se = result.final()["gmean"]
        rows.append((name, mean, se))
        print(f"{name:<11} {mean:.4f} ({se:.4f})  [{time.perf_counter() - start:.0f}s]", flush=True)
        if args.out_dir:
            write_csv(result, args.out_dir / f"{name}.csv")

    best, best_mean, best_se = max(rows, key=lambda r: r[1])
    print(f"\nhighest final G-mean: {best}")
    for name, mean, se in rows:
        if name != best:
            z = (best_mean - mean) / max(math.hypot(best_se, se), 1e-12)
            print(f"  vs {name:<11} gap {best_mean - mean:+.4f}, {z:.1f} combined SE")


if __name__ == "__main__":
    main()
