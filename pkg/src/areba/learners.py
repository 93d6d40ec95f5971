"""Online learners for imbalanced, drifting binary streams.

Every learner exposes ``predict_proba(x)``, ``predict(x)`` and
``observe(example)``; ``observe`` trains the underlying network(s) exactly
once per call, except for :class:`OOB`, which trains each member ``K`` times
with ``K ~ Poisson(lambda)``.

The queue machinery (:class:`QBRQueues`, :class:`AREBAQueues`) is kept apart
from the networks so it can be driven and checked on its own.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .nn import Network, NetworkConfig, init_network
from .stream import LabeledExample

LEARNERS = ("baseline", "sliding", "adaptive_cs", "oob", "qbr", "areba")


@dataclass
class ClassSizeTracker:
    """Time-decayed class sizes ``s_k <- theta * s_k + (1 - theta) * [y == k]``."""

    theta: float = 0.99
    s_p: float = 0.0
    s_n: float = 0.0
    t: int = 0

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")

    def update(self, y: int) -> None:
        th = self.theta
        self.s_p = th * self.s_p + (1.0 - th) * (y == 1)
        self.s_n = th * self.s_n + (1.0 - th) * (y == 0)
        self.t += 1

    def size(self, y: int) -> float:
        return self.s_p if y == 1 else self.s_n


class BoundedQueue:
    """FIFO of examples whose capacity can change; overflow drops the oldest."""

    def __init__(self, cap: int = 1):
        if cap < 1:
            raise ValueError(f"capacity must be at least 1, got {cap}")
        self.cap = cap
        self.items: deque = deque(maxlen=cap)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __repr__(self):
        return f"BoundedQueue(len={len(self.items)}, cap={self.cap})"

    def is_full(self) -> bool:
        return len(self.items) >= self.cap

    def is_empty(self) -> bool:
        return not self.items

    def append(self, item) -> None:
        self.items.append(item)

    def set_capacity(self, cap: int) -> None:
        if cap < 1:
            raise ValueError(f"capacity must be at least 1, got {cap}")
        if cap != self.cap:
            # rebuilding with a smaller maxlen keeps the newest items
            self.items = deque(self.items, maxlen=cap)
            self.cap = cap


class BalancedQueues:
    """One bounded queue per class sharing a total memory of ``memory`` examples."""

    def __init__(self, memory: int):
        if memory < 2 or memory % 2:
            raise ValueError(f"memory must be an even integer >= 2, got {memory}")
        self.memory = memory
        self.q_p = BoundedQueue(1)
        self.q_n = BoundedQueue(1)

    def __len__(self):
        return len(self.q_p) + len(self.q_n)

    def queue(self, y: int) -> BoundedQueue:
        return self.q_p if y == 1 else self.q_n

    @property
    def caps(self) -> tuple[int, int]:
        """``(cap_n, cap_p)``."""
        return self.q_n.cap, self.q_p.cap

    def training_set(self) -> tuple[np.ndarray, np.ndarray]:
        examples = list(self.q_p) + list(self.q_n)
        X = np.stack([e.x for e in examples])
        y = np.array([1] * len(self.q_p) + [0] * len(self.q_n), dtype=float)
        return X, y

    def observe(self, example: LabeledExample) -> None:
        raise NotImplementedError


class QBRQueues(BalancedQueues):
    """Queue-based resampling: each class queue grows by one when full, up to B/2."""

    def observe(self, example: LabeledExample) -> None:
        q = self.q_p if example.y == 1 else self.q_n
        q.append(example)
        # only the queue that just grew can have become full
        if q.is_full() and q.cap < self.memory // 2:
            q.set_capacity(q.cap + 1)


class AREBAQueues(BalancedQueues):
    """Adaptive rebalancing of the two class queues."""

    def __init__(self, memory: int, theta: float = 0.99):
        super().__init__(memory)
        self.tracker = ClassSizeTracker(theta)

    def observe(self, example: LabeledExample) -> None:
        y = example.y
        self.tracker.update(y)
        (self.q_p if y == 1 else self.q_n).append(example)
        adapt_capacities(self, self.tracker)


def adapt_capacities(queues: BalancedQueues, tracker: ClassSizeTracker) -> None:
    """Capacity update applied after the newest example has been appended."""
    B = queues.memory
    half = B // 2
    q_p, q_n = queues.q_p, queues.q_n

    if not q_p.items:
        if q_n.cap < B:
            q_n.set_capacity(q_n.cap + 1)
        return
    if not q_n.items:
        if q_p.cap < B:
            q_p.set_capacity(q_p.cap + 1)
        return

    # a cap above B/2 survives only when the second class shows up while the
    # first has a single stored example; without the clamp B=2 overflows
    if q_p.cap > half:
        q_p.set_capacity(half)
    if q_n.cap > half:
        q_n.set_capacity(half)

    # ties count as negative-minority
    if tracker.s_n > tracker.s_p:
        minority, majority = q_p, q_n
    else:
        minority, majority = q_n, q_p
    if len(minority.items) >= minority.cap:
        if minority.cap < half:
            minority.set_capacity(minority.cap + 1)
            majority.set_capacity(minority.cap - 1)
        elif majority.cap != minority.cap:
            majority.set_capacity(minority.cap)


@dataclass
class LearnerParams:
    memory: int = 20
    window: int = 100
    ensemble: int = 1
    theta: float = 0.99
    network: NetworkConfig = field(default_factory=NetworkConfig)


class Learner:
    name = "learner"

    def __init__(self, net: Network):
        self.net = net

    @property
    def networks(self) -> list[Network]:
        return [self.net]

    def predict_proba(self, x) -> float:
        return self.net.predict_proba(x)

    def predict(self, x) -> int:
        return int(self.predict_proba(x) >= 0.5)

    def observe(self, example: LabeledExample) -> None:
        raise NotImplementedError


class Baseline(Learner):
    """Incremental learner: one update on the newest example only."""

    name = "baseline"

    def observe(self, example):
        self.net.train_batch(example.x[None, :], [example.y])


class Sliding(Learner):
    """Trains on a single FIFO window of the most recent examples."""

    name = "sliding"

    def __init__(self, net: Network, window: int = 100):
        super().__init__(net)
        self.window = BoundedQueue(window)

    def observe(self, example):
        self.window.append(example)
        X = np.stack([e.x for e in self.window])
        y = np.array([e.y for e in self.window], dtype=float)
        self.net.train_batch(X, y)


class AdaptiveCS(Learner):
    """Cost-sensitive updates with a cost ratio re-estimated from class sizes."""

    name = "adaptive_cs"

    def __init__(
        self,
        net: Network,
        theta: float = 0.99,
        refresh_period: int = 250,
        initial_cost: float = 19.0,  # c_p / c_n = 0.95 / 0.05
        max_cost: float = 50.0,
    ):
        super().__init__(net)
        self.tracker = ClassSizeTracker(theta)
        self.refresh_period = refresh_period
        self.max_cost = max_cost
        self.c = initial_cost
        self.minority = 1

    def refresh_cost(self) -> None:
        s_p, s_n = self.tracker.s_p, self.tracker.s_n
        if s_p < s_n:
            self.minority = 1
            ratio = s_n / s_p if s_p > 0 else np.inf
        elif s_n < s_p:
            self.minority = 0
            ratio = s_p / s_n if s_n > 0 else np.inf
        else:
            ratio = 1.0
        self.c = float(min(max(ratio, 1.0), self.max_cost))

    def observe(self, example):
        self.tracker.update(example.y)
        if self.tracker.t % self.refresh_period == 0:
            self.refresh_cost()
        w = self.c if example.y == self.minority else 1.0
        self.net.train_batch(example.x[None, :], [example.y], [w])


def oob_rate(tracker: ClassSizeTracker, y: int) -> float:
    """Poisson rate for an arriving example of class ``y``."""
    s_this, s_other = tracker.size(y), tracker.size(1 - y)
    if 0.0 < s_this < s_other:
        return s_other / s_this
    return 1.0


class OOB(Learner):
    """Oversampling online bagging over ``len(nets)`` members."""

    name = "oob"

    def __init__(self, nets: list[Network], rngs: list[np.random.Generator], theta: float = 0.99):
        if not nets or len(nets) != len(rngs):
            raise ValueError("need one RNG per ensemble member and at least one member")
        super().__init__(nets[0])
        self.members = nets
        self.rngs = rngs
        self.tracker = ClassSizeTracker(theta)

    @property
    def networks(self):
        return list(self.members)

    def predict_proba(self, x) -> float:
        return float(np.mean([m.predict_proba(x) for m in self.members]))

    def observe(self, example):
        self.tracker.update(example.y)
        lam = oob_rate(self.tracker, example.y)
        X, y = example.x[None, :], [example.y]
        for net, rng in zip(self.members, self.rngs):
            for _ in range(rng.poisson(lam)):
                net.train_batch(X, y)


class QBR(Learner):
    name = "qbr"

    def __init__(self, net: Network, memory: int = 20):
        super().__init__(net)
        self.queues = QBRQueues(memory)

    def observe(self, example):
        self.queues.observe(example)
        self.net.train_batch(*self.queues.training_set())


class AREBA(Learner):
    name = "areba"

    def __init__(self, net: Network, memory: int = 20, theta: float = 0.99):
        super().__init__(net)
        self.queues = AREBAQueues(memory, theta)

    @property
    def tracker(self) -> ClassSizeTracker:
        return self.queues.tracker

    def observe(self, example):
        self.queues.observe(example)
        self.net.train_batch(*self.queues.training_set())


def make_learner(name: str, params: LearnerParams, rng: np.random.Generator) -> Learner:
    """Build a fresh learner; network weights and OOB sampling draw from ``rng``."""
    if name not in LEARNERS:
        raise ValueError(f"unknown learner {name!r}, expected one of {LEARNERS}")
    cfg = params.network
    if name == "oob":
        if params.ensemble < 1:
            raise ValueError("ensemble size must be at least 1")
        children = rng.bit_generator.seed_seq.spawn(params.ensemble)
        nets, rngs = [], []
        for child in children:
            init_seq, poisson_seq = child.spawn(2)
            nets.append(init_network(cfg, np.random.default_rng(init_seq)))
            rngs.append(np.random.default_rng(poisson_seq))
        return OOB(nets, rngs, params.theta)

    net = init_network(cfg, rng)
    if name == "baseline":
        return Baseline(net)
    if name == "sliding":
        return Sliding(net, params.window)
    if name == "adaptive_cs":
        return AdaptiveCS(net, params.theta)
    if name == "qbr":
        return QBR(net, params.memory)
    return AREBA(net, params.memory, params.theta)
