"""Labeled binary streams: synthetic drift generators and CSV ingestion.

Three two-dimensional concepts are available (circle, sine, sea), all
expressed on the unit square. A stream draws the label first from the
active class prior and then rejection-samples a point inside that label's
region, so the requested imbalance holds exactly in expectation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

CONCEPTS = ("circle", "sine", "sea")
DRIFT_TYPES = ("none", "prior", "likelihood", "posterior")

MAX_REJECTION_ROUNDS = 10**6

# class-conditional split used by the likelihood drift: p(x1 < 0.6 | y=0)
LIKELIHOOD_SPLIT = 0.6
LIKELIHOOD_LEFT_BEFORE = 0.9
LIKELIHOOD_LEFT_AFTER = 0.1


class StreamError(RuntimeError):
    """Raised when a stream cannot be generated."""


class CSVLoadError(ValueError):
    """Raised for malformed CSV input; the message carries the location."""


class LabeledExample(NamedTuple):
    x: np.ndarray
    y: int
    # noise-free label; differs from ``y`` only when label noise flipped it
    true_y: int


@dataclass(frozen=True)
class ConceptSpec:
    kind: str
    center: tuple[float, float] = (0.4, 0.5)
    radius: float = 0.2
    sea_threshold: float = 7.0

    def __post_init__(self):
        if self.kind not in CONCEPTS:
            raise ValueError(f"unknown concept {self.kind!r}, expected one of {CONCEPTS}")


@dataclass(frozen=True)
class DriftSpec:
    drift_type: str = "none"
    onset_step: int = 0

    def __post_init__(self):
        if self.drift_type not in DRIFT_TYPES:
            raise ValueError(f"unknown drift type {self.drift_type!r}, expected one of {DRIFT_TYPES}")
        if self.onset_step < 0:
            raise ValueError("onset_step must be non-negative")


@dataclass(frozen=True)
class StreamConfig:
    concept: ConceptSpec
    imbalance_rate: float = 0.01
    drift: DriftSpec = field(default_factory=DriftSpec)
    noise_prob: float = 0.0
    seed: int | None = 0
    steps: int = 5000

    def __post_init__(self):
        if not 0.0 < self.imbalance_rate <= 0.5:
            raise ValueError(f"imbalance_rate must lie in (0, 0.5], got {self.imbalance_rate}")
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ValueError(f"noise_prob must lie in [0, 1], got {self.noise_prob}")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.drift.drift_type != "none" and self.drift.onset_step >= self.steps:
            raise ValueError(
                f"drift onset {self.drift.onset_step} is not before the end of the stream ({self.steps} steps)"
            )


@dataclass(frozen=True)
class Regime:
    """Data-generating regime active at one time step."""

    prior: float
    # p(x1 < 0.6 | y=0), or None when negatives are unconstrained
    negative_left_prob: float | None
    flipped: bool


def concept_labels(concept: ConceptSpec, X: np.ndarray) -> np.ndarray:
    """Noise-free labels of the un-drifted concept for the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    x1, x2 = X[..., 0], X[..., 1]
    if concept.kind == "circle":
        cx, cy = concept.center
        inside = (x1 - cx) ** 2 + (x2 - cy) ** 2 <= concept.radius**2
    elif concept.kind == "sine":
        # unit square back to x1 in [0, 2pi], x2 in [-1, 1]
        inside = 2.0 * x2 - 1.0 <= np.sin(2.0 * np.pi * x1)
    else:
        # unit square back to [0, 10]^2
        inside = 10.0 * x1 + 10.0 * x2 <= concept.sea_threshold
    return inside.astype(np.int64)


def classify_concept(concept: ConceptSpec, x: Sequence[float], flipped: bool = False) -> int:
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise ValueError(f"expected a point in [0,1]^2, got shape {x.shape}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"point {x.tolist()} lies outside [0,1]^2")
    label = int(concept_labels(concept, x))
    return 1 - label if flipped else label


def effective_regime(config: StreamConfig, t: int) -> Regime:
    drift = config.drift
    after = drift.drift_type != "none" and t >= drift.onset_step
    prior = config.imbalance_rate
    if drift.drift_type == "prior" and after:
        prior = 1.0 - config.imbalance_rate
    left = None
    if drift.drift_type == "likelihood":
        left = LIKELIHOOD_LEFT_AFTER if after else LIKELIHOOD_LEFT_BEFORE
    flipped = drift.drift_type == "posterior" and after
    return Regime(prior=prior, negative_left_prob=left, flipped=flipped)


def sample_examples(
    config: StreamConfig, steps: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw one example per entry of ``steps``.

    Returns ``(X, emitted_labels, true_labels)``.
    """
    steps = np.asarray(steps, dtype=np.int64)
    n = steps.size
    drift = config.drift
    after = np.zeros(n, dtype=bool)
    if drift.drift_type != "none":
        after = steps >= drift.onset_step

    prior = np.full(n, config.imbalance_rate)
    if drift.drift_type == "prior":
        prior[after] = 1.0 - config.imbalance_rate
    flipped = after if drift.drift_type == "posterior" else np.zeros(n, dtype=bool)

    y = (rng.random(n) < prior).astype(np.int64)

    # -1: unconstrained, 1: x1 < 0.6, 0: x1 >= 0.6
    region = np.full(n, -1, dtype=np.int64)
    if drift.drift_type == "likelihood":
        left_prob = np.where(after, LIKELIHOOD_LEFT_AFTER, LIKELIHOOD_LEFT_BEFORE)
        left = rng.random(n) < left_prob
        neg = y == 0
        region[neg] = left[neg].astype(np.int64)

    X = np.empty((n, 2))
    pending = np.arange(n)
    rounds = 0
    while pending.size:
        rounds += 1
        if rounds > MAX_REJECTION_ROUNDS:
            raise StreamError(
                f"rejection sampling did not terminate after {MAX_REJECTION_ROUNDS} rounds "
                f"({pending.size} examples pending)"
            )
        cand = rng.random((pending.size, 2))
        reg = region[pending]
        cand[reg == 1, 0] *= LIKELIHOOD_SPLIT
        right = reg == 0
        cand[right, 0] = LIKELIHOOD_SPLIT + (1.0 - LIKELIHOOD_SPLIT) * cand[right, 0]
        labels = concept_labels(config.concept, cand)
        labels = np.where(flipped[pending], 1 - labels, labels)
        ok = labels == y[pending]
        X[pending[ok]] = cand[ok]
        pending = pending[~ok]

    noise = rng.random(n) < config.noise_prob
    emitted = np.where(noise, 1 - y, y)
    return X, emitted, y


def sample_example(config: StreamConfig, t: int, rng: np.random.Generator) -> LabeledExample:
    X, y, true_y = sample_examples(config, np.array([t]), rng)
    return LabeledExample(X[0], int(y[0]), int(true_y[0]))


def synthetic_stream(config: StreamConfig) -> list[LabeledExample]:
    """Materialise the whole stream described by ``config``.

    The result depends only on ``config`` (including its seed).
    """
    rng = np.random.default_rng(config.seed)
    X, y, true_y = sample_examples(config, np.arange(config.steps), rng)
    return list(map(LabeledExample, X, y.tolist(), true_y.tolist()))


def load_csv_table(path: str | Path, label_column: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a numeric CSV and min-max rescale each feature to [0, 1].

    Constant feature columns map to 0.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CSVLoadError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise CSVLoadError(f"{path}: label column {label_column!r} not found in header {header}")
        label_idx = header.index(label_column)
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise CSVLoadError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            values = []
            for col, cell in enumerate(row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CSVLoadError(
                        f"{path}:{lineno}: non-numeric value {cell!r} in column {header[col]!r}"
                    ) from None
            label = values.pop(label_idx)
            if label not in (0.0, 1.0):
                raise CSVLoadError(f"{path}:{lineno}: label {row[label_idx]!r} is not 0 or 1")
            rows.append(values)
            labels.append(int(label))
    if not rows:
        raise CSVLoadError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=float).reshape(len(rows), len(header) - 1)
    y = np.asarray(labels, dtype=np.int64)
    if not (y == 1).any() or not (y == 0).any():
        raise CSVLoadError(f"{path}: both classes must be present in column {label_column!r}")
    if not np.all(np.isfinite(X)):
        raise CSVLoadError(f"{path}: non-finite feature values")

    lo, hi = X.min(axis=0), X.max(axis=0)
    span = hi - lo
    scaled = np.zeros_like(X)
    varying = span > 0
    scaled[:, varying] = (X[:, varying] - lo[varying]) / span[varying]
    return scaled, y


def shuffled_examples(X: np.ndarray, y: np.ndarray, shuffle_seed: int | None) -> list[LabeledExample]:
    order = np.random.default_rng(shuffle_seed).permutation(len(y))
    return [LabeledExample(X[i], int(y[i]), int(y[i])) for i in order]


def load_csv_stream(
    path: str | Path, label_column: str, shuffle_seed: int | None = 0
) -> list[LabeledExample]:
    X, y = load_csv_table(path, label_column)
    return shuffled_examples(X, y, shuffle_seed)

