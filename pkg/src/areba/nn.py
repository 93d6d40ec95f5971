"""Small dense binary classifier trained with Adam.

Hidden layers use LeakyReLU, the single output unit a sigmoid. The loss is
the (optionally per-example weighted) binary cross-entropy averaged over the
batch, plus ``l2 / 2 * ||W||^2`` over weight matrices. Each call to
:meth:`Network.train_batch` performs exactly one optimizer step.

All parameters live in one flat vector; per-layer weights and biases are
views into it, which keeps the Adam update to a handful of array ops.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_CLIP = 1e-7


@dataclass(frozen=True)
class NetworkConfig:
    layer_sizes: tuple[int, ...] = (2, 8, 1)
    leaky_slope: float = 0.3
    learning_rate: float = 0.01
    l2: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"invalid layer sizes {sizes}")
        if sizes[-1] != 1:
            raise ValueError("binary classifier needs a single output unit")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")


def sigmoid(z):
    # tanh form avoids overflow warnings for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def leaky_relu(z, slope: float = 0.3):
    return np.where(z > 0, z, slope * z)


def weighted_bce(y, p, w=1.0):
    """``w * (-y ln p - (1-y) ln(1-p))`` with ``p`` clipped away from 0 and 1."""
    p = np.clip(p, EPS_CLIP, 1.0 - EPS_CLIP)
    return w * -(y * np.log(p) + (1 - y) * np.log(1.0 - p))


class Network:
    def __init__(self, config: NetworkConfig, params: np.ndarray | None = None):
        self.config = config
        sizes = config.layer_sizes
        self._shapes = [(a, b) for a, b in zip(sizes[:-1], sizes[1:])]
        n = sum(a * b + b for a, b in self._shapes)
        self.params = np.zeros(n) if params is None else np.array(params, dtype=float)
        if self.params.shape != (n,):
            raise ValueError(f"expected {n} parameters, got {self.params.shape}")
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.updates = 0
        self.weights, self.biases = self._views(self.params)
        self._weight_mask = np.zeros(n)
        for w in self._views(self._weight_mask)[0]:
            w[...] = 1.0

    @property
    def n_params(self) -> int:
        return self.params.size

    def _views(self, flat: np.ndarray):
        weights, biases = [], []
        i = 0
        for a, b in self._shapes:
            weights.append(flat[i : i + a * b].reshape(a, b))
            i += a * b
            biases.append(flat[i : i + b])
            i += b
        return weights, biases

    def set_params(self, flat: np.ndarray):
        self.params[...] = flat

    def _forward(self, X: np.ndarray):
        slope = self.config.leaky_slope
        acts = [X]
        pre = []
        h = X
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ W + b
            pre.append(z)
            h = sigmoid(z) if i == last else np.where(z > 0, z, slope * z)
            acts.append(h)
        return pre, acts

    def predict_proba(self, X) -> np.ndarray | float:
        """Estimated p(y=1 | x); a float for one example, an array for a batch."""
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = X.reshape(1, -1) if single else X
        if X2.shape[1] != self.config.layer_sizes[0]:
            raise ValueError(f"expected {self.config.layer_sizes[0]} features, got {X2.shape[1]}")
        _, acts = self._forward(X2)
        p = acts[-1][:, 0]
        return float(p[0]) if single else p

    def predict(self, X):
        p = self.predict_proba(X)
        if isinstance(p, float):
            return int(p >= 0.5)
        return (p >= 0.5).astype(np.int64)

    def cost(self, X, y, w=None) -> float:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).reshape(-1)
        w = np.ones_like(y) if w is None else np.asarray(w, dtype=float).reshape(-1)
        _, acts = self._forward(X)
        p = acts[-1][:, 0]
        data = float(np.mean(weighted_bce(y, p, w)))
        return data + 0.5 * self.config.l2 * float(np.sum(self._weight_mask * self.params**2))

    def loss_and_grad(self, X, y, w=None) -> tuple[float, np.ndarray]:
        """Batch cost and its gradient with respect to the flat parameter vector."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).reshape(-1)
        n = y.size
        if n == 0:
            raise ValueError("empty batch")
        if X.shape != (n, self.config.layer_sizes[0]):
            raise ValueError(f"batch shape {X.shape} does not match {n} labels and input size")
        w = np.ones(n) if w is None else np.asarray(w, dtype=float).reshape(-1)
        slope = self.config.leaky_slope

        pre, acts = self._forward(X)
        p = acts[-1][:, 0]
        l2 = self.config.l2
        cost = float(np.mean(weighted_bce(y, p, w)))
        if l2:
            cost += 0.5 * l2 * float(np.sum(self._weight_mask * self.params**2))

        grad = np.empty_like(self.params)
        gW, gb = self._views(grad)
        # d cost / d output pre-activation (sigmoid + cross-entropy)
        delta = ((w * (p - y)) / n).reshape(n, 1)
        for i in range(len(self.weights) - 1, -1, -1):
            gW[i][...] = acts[i].T @ delta
            gb[i][...] = delta.sum(axis=0)
            if i:
                delta = (delta @ self.weights[i].T) * np.where(pre[i - 1] > 0, 1.0, slope)
        if l2:
            grad += l2 * self._weight_mask * self.params
        return cost, grad

    def adam_step(self, grad: np.ndarray):
        c = self.config
        self.updates += 1
        t = self.updates
        self.m *= c.beta1
        self.m += (1.0 - c.beta1) * grad
        self.v *= c.beta2
        self.v += (1.0 - c.beta2) * grad * grad
        m_hat = self.m / (1.0 - c.beta1**t)
        v_hat = self.v / (1.0 - c.beta2**t)
        self.params -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.epsilon)

    def train_batch(self, X, y, w=None) -> float:
        """One Adam step on the mean weighted cross-entropy of the batch.

        Returns the cost evaluated before the step.
        """
        cost, grad = self.loss_and_grad(X, y, w)
        self.adam_step(grad)
        return cost


def init_network(config: NetworkConfig, rng: np.random.Generator) -> Network:
    """He-normal weights (std ``sqrt(2 / fan_in)``), zero biases."""
    net = Network(config)
    for W in net.weights:
        W[...] = rng.normal(0.0, np.sqrt(2.0 / W.shape[0]), size=W.shape)
    return net


def forward(net: Network, x) -> float:
    return net.predict_proba(x)
