from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ColumnScaler:
    """Per-column min-max map fitted on training rows; constant columns map to 0."""

    offset: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "ColumnScaler":
        X = np.asarray(X, dtype=np.float64)
        lo, hi = X.min(axis=0), X.max(axis=0)
        span = hi - lo
        scale = np.where(span > 0, 1.0 / np.where(span > 0, span, 1.0), 0.0)
        return cls(lo, scale)

    @classmethod
    def identity(cls, d: int) -> "ColumnScaler":
        return cls(np.zeros(d), np.ones(d))

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.offset) * self.scale
