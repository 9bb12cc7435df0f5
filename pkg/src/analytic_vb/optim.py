"""First-order ascent steppers over flat parameter vectors."""

import numpy as np


class AscentOptimizer:
    """Gradient-ascent stepper: plain SGD with optional momentum, or
    adagrad-style per-coordinate second-moment scaling."""

    def __init__(self, kind, learning_rate, momentum=0.0, eps=1e-8):
        if kind not in ("sgd", "adagrad"):
            raise ValueError(f"unknown optimizer {kind!r}")
        self.kind = kind
        self.lr = learning_rate
        self.momentum = momentum
        self.eps = eps
        self._state = None

    def step(self, theta, grad):
        if self._state is None:
            self._state = np.zeros_like(theta)
        if self.kind == "sgd":
            if self.momentum > 0:
                self._state = self.momentum * self._state + grad
                return theta + self.lr * self._state
            return theta + self.lr * grad
        self._state = self._state + grad * grad
        return theta + self.lr * grad / np.sqrt(self._state + self.eps)
