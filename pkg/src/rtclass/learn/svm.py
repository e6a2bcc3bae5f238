"""One-vs-all linear SVMs trained with Pegasos."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..seeding import rng_for
from .forest import _check_training_data
from .scaling import ColumnScaler


@dataclass(frozen=True)
class SvmConfig:
    lam: float = 1e-4
    epochs: int = 30


@dataclass(frozen=True, eq=False)
class SvmModel:
    weights: np.ndarray   # (n_classes, d)
    bias: np.ndarray      # (n_classes,)
    scaler: ColumnScaler
    config: SvmConfig = field(default_factory=SvmConfig)
    seed: int = 0

    @property
    def n_classes(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])

    def decision_function(self, X) -> np.ndarray:
        return self.scaler.transform(X) @ self.weights.T + self.bias

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)


def sample_order(n: int, epochs: int, rng: np.random.Generator) -> np.ndarray:
    """One fresh permutation of ``range(n)`` per epoch, concatenated."""
    if epochs == 0:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate([rng.permutation(n) for _ in range(epochs)]).astype(np.int64)


def train_svm(X, y, config: SvmConfig = SvmConfig(), seed: int = 0,
              n_classes: int | None = None, scale: bool = True) -> SvmModel:
    """Fit one hinge-loss machine per class (class vs rest).

    Columns are min-max scaled on the training rows first (``scale=False``
    keeps them as given).  The bias is an extra constant-one input column,
    regularized together with the weights.
    """
    X, y, n_classes = _check_training_data(X, y, n_classes)
    if config.lam <= 0:
        raise ValueError("lam must be > 0")
    scaler = ColumnScaler.fit(X) if scale else ColumnScaler.identity(X.shape[1])
    Xa = np.hstack([scaler.transform(X), np.ones((X.shape[0], 1))])
    order = sample_order(X.shape[0], config.epochs, rng_for(seed, "svm"))
    W = np.zeros((n_classes, Xa.shape[1]))
    for c in range(n_classes):
        target = np.where(y == c, 1.0, -1.0)
        W[c] = kernels.pegasos_train(Xa, target, config.lam, order)
    return SvmModel(W[:, :-1].copy(), W[:, -1].copy(), scaler, config, seed)
