"""Prequential (test-then-train) metrics with a fading factor."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class PrequentialState:
    """Faded class counts and faded correct counts.

    All four accumulators decay by ``theta`` every step, so recall is
    ``tp / n_p`` and specificity ``tn / n_n`` over an exponential window.
    """

    theta: float = 0.99
    n_p: float = 0.0
    n_n: float = 0.0
    tp: float = 0.0
    tn: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")

    def update(self, y: int, y_hat: int) -> None:
        th = self.theta
        self.n_p *= th
        self.n_n *= th
        self.tp *= th
        self.tn *= th
        if y == 1:
            self.n_p += 1.0
            self.tp += y_hat == 1
        else:
            self.n_n += 1.0
            self.tn += y_hat == 0

    @property
    def recall(self) -> float:
        return self.tp / self.n_p if self.n_p > 0 else 0.0

    @property
    def specificity(self) -> float:
        return self.tn / self.n_n if self.n_n > 0 else 0.0

    @property
    def gmean(self) -> float:
        return gmean(self.recall, self.specificity)

    def metrics(self) -> dict[str, float]:
        return {"gmean": self.gmean, "recall": self.recall, "specificity": self.specificity}


def gmean(recall: float, specificity: float) -> float:
    return math.sqrt(recall * specificity)
