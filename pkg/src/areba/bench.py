"""Experiment runner and command-line entry point.

Each repetition builds a fresh stream and learner from a seed derived from
the master seed, then runs the prequential loop: predict, score against the
noise-free label, reveal the (possibly noisy) label, train. Per-step
G-mean, recall and specificity are aggregated across repetitions into a
mean and a standard error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .evaluation import PrequentialState
from .learners import LEARNERS, LearnerParams, make_learner
from .nn import NetworkConfig
from .stream import (
    CONCEPTS,
    DRIFT_TYPES,
    ConceptSpec,
    DriftSpec,
    LabeledExample,
    StreamConfig,
    load_csv_table,
    shuffled_examples,
    synthetic_stream,
)

METRICS = ("gmean", "recall", "specificity")


class AggregationError(ValueError):
    pass


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    learner: str
    stream: StreamConfig | None = None
    csv_path: str | None = None
    label_col: str | None = None
    memory: int = 20
    window: int = 100
    ensemble: int = 1
    theta: float = 0.99
    hidden: tuple[int, ...] = (8,)
    lr: float = 0.01
    l2: float = 0.0
    leaky_slope: float = 0.3
    reps: int = 50
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.learner not in LEARNERS:
            raise ValueError(f"unknown learner {self.learner!r}, expected one of {LEARNERS}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if (self.stream is None) == (self.csv_path is None):
            raise ValueError("exactly one of a synthetic stream or a CSV path is required")
        if self.csv_path is not None and not self.label_col:
            raise ValueError("a CSV stream needs a label column")
        if self.memory < 2 or self.memory % 2:
            raise ValueError(f"memory must be an even integer >= 2, got {self.memory}")
        if self.window < 1 or self.ensemble < 1:
            raise ValueError("window and ensemble sizes must be at least 1")

    def learner_params(self, n_features: int) -> LearnerParams:
        net = NetworkConfig(
            layer_sizes=(n_features, *self.hidden, 1),
            leaky_slope=self.leaky_slope,
            learning_rate=self.lr,
            l2=self.l2,
        )
        return LearnerParams(
            memory=self.memory, window=self.window, ensemble=self.ensemble, theta=self.theta, network=net
        )


@dataclass
class RunResult:
    per_rep: np.ndarray  # (reps, steps, len(METRICS))
    mean: np.ndarray  # (steps, len(METRICS))
    stderr: np.ndarray

    @property
    def steps(self) -> int:
        return self.mean.shape[0]

    def series(self, metric: str = "gmean") -> tuple[np.ndarray, np.ndarray]:
        k = METRICS.index(metric)
        return self.mean[:, k], self.stderr[:, k]

    def final(self) -> dict[str, tuple[float, float]]:
        """``metric -> (mean, stderr)`` at the last step."""
        if not self.steps:
            return {}
        return {m: (float(self.mean[-1, k]), float(self.stderr[-1, k])) for k, m in enumerate(METRICS)}


def rep_seeds(master: int, rep: int) -> tuple[int, np.random.SeedSequence]:
    """Stream seed and learner seed sequence for one repetition."""
    stream_seq, learner_seq = np.random.SeedSequence([master, rep]).spawn(2)
    return int(stream_seq.generate_state(1)[0]), learner_seq


def prequential_run(learner, examples, theta: float = 0.99) -> np.ndarray:
    """Test-then-train over ``examples``; returns per-step (gmean, recall, specificity)."""
    state = PrequentialState(theta)
    out = np.empty((len(examples), len(METRICS)))
    for t, ex in enumerate(examples):
        y_hat = learner.predict(ex.x)
        state.update(ex.true_y, y_hat)
        out[t] = state.gmean, state.recall, state.specificity
        learner.observe(ex)
    return out


def _rep_examples(config: ExperimentConfig, rep: int, table) -> tuple[list[LabeledExample], np.random.SeedSequence]:
    stream_seed, learner_seq = rep_seeds(config.seed, rep)
    if table is not None:
        X, y = table
        return shuffled_examples(X, y, stream_seed), learner_seq
    return synthetic_stream(replace(config.stream, seed=stream_seed)), learner_seq


def run_repetition(config: ExperimentConfig, rep: int, table=None) -> np.ndarray:
    try:
        examples, learner_seq = _rep_examples(config, rep, table)
        n_features = table[0].shape[1] if table is not None else 2
        learner = make_learner(config.learner, config.learner_params(n_features), np.random.default_rng(learner_seq))
    except Exception as exc:
        raise ExperimentError(f"repetition {rep}: {exc}") from exc
    return prequential_run(learner, examples)


def _run_rep_job(args):
    return run_repetition(*args)


def aggregate(series: list[np.ndarray] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-step mean and standard error (sample std / sqrt(R)) across repetitions."""
    lengths = {len(s) for s in series}
    if len(lengths) > 1:
        raise AggregationError(f"repetitions have different lengths: {sorted(lengths)}")
    arr = np.asarray(series, dtype=float)
    if arr.shape[0] == 0:
        raise AggregationError("no repetitions to aggregate")
    mean = arr.mean(axis=0)
    if arr.shape[0] == 1:
        return mean, np.zeros_like(mean)
    se = arr.std(axis=0, ddof=1) / np.sqrt(arr.shape[0])
    return mean, se


def run_experiment(config: ExperimentConfig) -> RunResult:
    table = load_csv_table(config.csv_path, config.label_col) if config.csv_path else None
    jobs = [(config, r, table) for r in range(config.reps)]
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            per_rep = list(pool.map(_run_rep_job, jobs))
    else:
        per_rep = [_run_rep_job(j) for j in jobs]
    mean, se = aggregate(per_rep)
    return RunResult(np.asarray(per_rep).reshape(config.reps, -1, len(METRICS)), mean, se)


def write_csv(result: RunResult, path: str | Path, per_rep_path: str | Path | None = None) -> None:
    """Write ``step,metric,mean,stderr`` rows in step order; the last rows are the final step."""
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "metric", "mean", "stderr"])
            for t in range(result.steps):
                for k, m in enumerate(METRICS):
                    w.writerow([t, m, repr(float(result.mean[t, k])), repr(float(result.stderr[t, k]))])
        if per_rep_path is not None:
            per_rep_path = Path(per_rep_path)
            with per_rep_path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["step", "rep", *METRICS])
                for t in range(result.steps):
                    for r in range(result.per_rep.shape[0]):
                        w.writerow([t, r, *(repr(float(v)) for v in result.per_rep[r, t])])
    except OSError as exc:
        raise OSError(f"cannot write results to {exc.filename or path}: {exc.strerror}") from exc


def read_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_csv` for the aggregate file: ``(mean, stderr)``."""
    rows = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows[(int(row["step"]), row["metric"])] = (float(row["mean"]), float(row["stderr"]))
    steps = 1 + max((t for t, _ in rows), default=-1)
    mean = np.zeros((steps, len(METRICS)))
    se = np.zeros_like(mean)
    for (t, m), (mu, s) in rows.items():
        mean[t, METRICS.index(m)] = mu
        se[t, METRICS.index(m)] = s
    return mean, se


# learning rates used for the known datasets; other CSVs fall back to 0.01
DATASET_LR = {"circle": 0.01, "sine": 0.01, "sea": 0.01, "csv": 0.01}


def _hidden(text: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"hidden sizes must be comma-separated integers, got {text!r}") from None
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError(f"invalid hidden sizes {text!r}")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="areba-bench",
        description="Prequential benchmark of online learners on imbalanced, drifting streams.",
    )
    p.add_argument("--learner", choices=LEARNERS, required=True)
    p.add_argument("--memory", type=int, default=20, help="total queue memory B (qbr, areba)")
    p.add_argument("--window", type=int, default=100, help="window size W (sliding)")
    p.add_argument("--ensemble", type=int, default=1, help="ensemble size (oob)")
    p.add_argument("--theta", type=float, default=0.99, help="decay factor for class sizes")
    p.add_argument("--dataset", choices=(*CONCEPTS, "csv"), required=True)
    p.add_argument("--csv-path")
    p.add_argument("--label-col")
    p.add_argument("--imbalance", type=float, default=0.01, help="p(y=1) before any drift")
    p.add_argument("--drift", choices=DRIFT_TYPES, default="none")
    p.add_argument("--drift-step", type=int)
    p.add_argument("--noise", type=float, default=0.0, help="label-flip probability")
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float)
    p.add_argument("--hidden", type=_hidden, default=(8,), help="comma-separated hidden layer sizes")
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1, help="repetitions run in parallel")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--per-rep-out", help="optional long-format per-repetition CSV")
    return p


def parse_cli(argv: list[str] | None = None) -> tuple[ExperimentConfig, argparse.Namespace]:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.drift != "none" and args.drift_step is None:
        parser.error(f"--drift {args.drift} requires --drift-step")
    stream = None
    if args.dataset == "csv":
        if not args.csv_path or not args.label_col:
            parser.error("--dataset csv requires --csv-path and --label-col")
        if args.drift != "none" or args.noise:
            parser.error("--drift and --noise apply to synthetic datasets only")
    else:
        try:
            stream = StreamConfig(
                concept=ConceptSpec(args.dataset),
                imbalance_rate=args.imbalance,
                drift=DriftSpec(args.drift, args.drift_step or 0),
                noise_prob=args.noise,
                steps=args.steps,
            )
        except ValueError as exc:
            parser.error(str(exc))
    lr = args.lr if args.lr is not None else DATASET_LR[args.dataset]
    try:
        config = ExperimentConfig(
            learner=args.learner,
            stream=stream,
            csv_path=args.csv_path if args.dataset == "csv" else None,
            label_col=args.label_col,
            memory=args.memory,
            window=args.window,
            ensemble=args.ensemble,
            theta=args.theta,
            hidden=args.hidden,
            lr=lr,
            l2=args.l2,
            reps=args.reps,
            seed=args.seed,
            jobs=args.jobs,
        )
        config.learner_params(2)
    except ValueError as exc:
        parser.error(str(exc))
    return config, args


def main(argv: list[str] | None = None) -> int:
    config, args = parse_cli(argv)
    result = run_experiment(config)
    write_csv(result, args.out, args.per_rep_out)
    for m, (mu, se) in result.final().items():
        print(f"final {m}: {mu:.4f} +/- {se:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
