from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeding import rng_for


@dataclass(frozen=True, eq=False)
class CvSplit:
    folds: tuple[np.ndarray, ...]
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_test(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        test = self.folds[i]
        train = np.sort(np.concatenate([f for j, f in enumerate(self.folds) if j != i]))
        return train, test


def stratified_kfold(labels, k: int, seed: int, class_names=None) -> CvSplit:
    """Seeded stratified partition of ``range(len(labels))`` into ``k`` folds.

    Each class is shuffled and dealt round-robin; the dealing position carries
    over from one class to the next so that total fold sizes also differ by
    at most one.
    """
    y = np.asarray(labels)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    classes, counts = np.unique(y, return_counts=True)
    for c, n in zip(classes, counts):
        if n < k:
            name = class_names[int(c)] if class_names is not None else c
            name = getattr(name, "value", name)
            raise ValueError(f"class {name} has {n} samples, fewer than k={k}")
    rng = rng_for(seed, "cv")
    buckets: list[list[int]] = [[] for _ in range(k)]
    pos = 0
    for c in classes:
        idx = rng.permutation(np.flatnonzero(y == c))
        for i in idx:
            buckets[pos % k].append(int(i))
            pos += 1
    folds = tuple(np.array(sorted(b), dtype=np.int64) for b in buckets)
    return CvSplit(folds, seed)
