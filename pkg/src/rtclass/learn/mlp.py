"""Single-hidden-layer perceptron: logistic hidden units, softmax output."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..seeding import rng_for
from .forest import _check_training_data
from .scaling import ColumnScaler


@dataclass(frozen=True)
class MlpConfig:
    hidden: int | None = None      # None -> ceil((d + c) / 2)
    learning_rate: float = 2.0
    epochs: int = 1000

    def hidden_units(self, d: int, c: int) -> int:
        return self.hidden if self.hidden is not None else math.ceil((d + c) / 2)


@dataclass(frozen=True, eq=False)
class MlpParams:
    W1: np.ndarray  # (h, d)
    b1: np.ndarray  # (h,)
    W2: np.ndarray  # (c, h)
    b2: np.ndarray  # (c,)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.W1.shape[1], self.W1.shape[0], self.W2.shape[0]

    def flat(self) -> np.ndarray:
        return np.concatenate([self.W1.ravel(), self.b1, self.W2.ravel(), self.b2])

    @classmethod
    def from_flat(cls, v, sizes) -> "MlpParams":
        d, h, c = sizes
        v = np.asarray(v, dtype=np.float64)
        a, b = h * d, h * d + h
        e = b + c * h
        return cls(v[:a].reshape(h, d), v[a:b].copy(), v[b:e].reshape(c, h), v[e:e + c].copy())


def sigmoid(z):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def forward(params: MlpParams, X):
    """Hidden activations and output logits."""
    H = sigmoid(X @ params.W1.T + params.b1)
    return H, H @ params.W2.T + params.b2


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def loss(params: MlpParams, X, y) -> float:
    """Mean cross-entropy of the softmax outputs."""
    _, Z = forward(params, X)
    Z = Z - Z.max(axis=1, keepdims=True)
    logp = Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
    return float(-logp[np.arange(len(y)), y].mean())


def gradients(params: MlpParams, X, y) -> MlpParams:
    n = X.shape[0]
    H, Z = forward(params, X)
    dZ = _softmax(Z)
    dZ[np.arange(n), y] -= 1.0
    dZ /= n
    dH = (dZ @ params.W2) * H * (1.0 - H)
    return MlpParams(dH.T @ X, dH.sum(axis=0), dZ.T @ H, dZ.sum(axis=0))


def init_params(d: int, h: int, c: int, seed: int) -> MlpParams:
    rng = rng_for(seed, "mlp")
    return MlpParams(
        W1=rng.uniform(-0.5, 0.5, size=(h, d)),
        b1=rng.uniform(-0.5, 0.5, size=h),
        W2=rng.uniform(-0.5, 0.5, size=(c, h)),
        b2=rng.uniform(-0.5, 0.5, size=c),
    )


@dataclass(frozen=True, eq=False)
class MlpModel:
    params: MlpParams
    scaler: ColumnScaler
    config: MlpConfig = field(default_factory=MlpConfig)
    seed: int = 0

    @property
    def layer_sizes(self) -> tuple[int, int, int]:
        return self.params.sizes

    @property
    def n_classes(self) -> int:
        return self.params.sizes[2]

    @property
    def n_features(self) -> int:
        return self.params.sizes[0]

    def logits(self, X) -> np.ndarray:
        return forward(self.params, self.scaler.transform(X))[1]

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1)


def train_mlp(X, y, config: MlpConfig = MlpConfig(), seed: int = 0,
              n_classes: int | None = None, scale: bool = True) -> MlpModel:
    """Full-batch gradient descent on mean cross-entropy for ``config.epochs`` steps."""
    X, y, n_classes = _check_training_data(X, y, n_classes)
    scaler = ColumnScaler.fit(X) if scale else ColumnScaler.identity(X.shape[1])
    Xs = scaler.transform(X)
    d = X.shape[1]
    params = init_params(d, config.hidden_units(d, n_classes), n_classes, seed)
    lr = config.learning_rate
    W1, b1, W2, b2 = params.W1.copy(), params.b1.copy(), params.W2.copy(), params.b2.copy()
    for _ in range(config.epochs):
        g = gradients(MlpParams(W1, b1, W2, b2), Xs, y)
        W1 -= lr * g.W1
        b1 -= lr * g.b1
        W2 -= lr * g.W2
        b2 -= lr * g.b2
    return MlpModel(MlpParams(W1, b1, W2, b2), scaler, config, seed)
