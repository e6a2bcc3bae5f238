"""Random forest of Gini trees (bootstrap rows, random feature subset per node)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..seeding import rng_for


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    features_per_split: int | None = None  # None -> ceil(sqrt(d))

    def mtry(self, n_features: int) -> int:
        if self.features_per_split is None:
            return max(1, math.ceil(math.sqrt(n_features)))
        return max(1, min(int(self.features_per_split), n_features))


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat binary tree; node 0 is the root, ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray      # (n_nodes, n_classes) bootstrap class counts
    gain: np.ndarray        # impurity decrease (sample-weighted) at split nodes

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def leaf_class(self) -> np.ndarray:
        return np.argmax(self.counts, axis=1).astype(np.int64)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return kernels.predict_tree(np.asarray(X, dtype=np.float64), self.feature,
                                    self.threshold, self.left, self.right, self.leaf_class)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple[Tree, ...]
    n_features: int
    n_classes: int
    config: ForestConfig = field(default_factory=ForestConfig)
    seed: int = 0

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def votes(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        v = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            v[rows, tree.predict(X)] += 1
        return v

    def predict(self, X) -> np.ndarray:
        # np.argmax returns the first maximum: ties go to the lowest class index
        return np.argmax(self.votes(X), axis=1)


def _sum_sq(c: np.ndarray) -> float:
    return float((c.astype(np.float64) ** 2).sum())


def _grow_tree(X, y, n_classes, mtry, max_depth, rng) -> Tree:
    n, d = X.shape
    boot = rng.integers(0, n, size=n)
    feature, threshold, left, right, counts, gain = [], [], [], [], [], []

    def new_node(c):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(c)
        gain.append(0.0)
        return len(feature) - 1

    root_counts = np.bincount(y[boot], minlength=n_classes)
    stack = [(new_node(root_counts), boot, 0)]
    while stack:
        node, idx, depth = stack.pop()
        c = counts[node]
        if (idx.size < 2 or np.count_nonzero(c) <= 1
                or (max_depth is not None and depth >= max_depth)):
            continue
        feats = rng.choice(d, size=mtry, replace=False)
        col, thr, score = kernels.best_split(X[np.ix_(idx, feats)], y[idx], n_classes)
        if col < 0:
            continue
        f = int(feats[col])
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = f
        threshold[node] = thr
        gain[node] = max(0.0, score - _sum_sq(c) / idx.size)
        ln = new_node(np.bincount(y[li], minlength=n_classes))
        rn = new_node(np.bincount(y[ri], minlength=n_classes))
        left[node], right[node] = ln, rn
        # right pushed first so the left subtree is expanded first
        stack.append((rn, ri, depth + 1))
        stack.append((ln, li, depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64).reshape(-1, n_classes),
        gain=np.array(gain, dtype=np.float64),
    )


def _check_training_data(X, y, n_classes):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError(f"bad training shapes X{X.shape} y{y.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("training matrix contains NaN or infinite values")
    if np.unique(y).size < 2:
        raise ValueError("training labels contain a single class")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError("labels must lie in [0, n_classes)")
    return X, y, int(n_classes)


def train_forest(X, y, config: ForestConfig = ForestConfig(), seed: int = 0,
                 n_classes: int | None = None) -> ForestModel:
    X, y, n_classes = _check_training_data(X, y, n_classes)
    mtry = config.mtry(X.shape[1])
    trees = tuple(
        _grow_tree(X, y, n_classes, mtry, config.max_depth, rng_for(seed, "tree", t))
        for t in range(config.n_trees))
    return ForestModel(trees, X.shape[1], n_classes, config, seed)


def feature_importance(forest: ForestModel, feature_names=None) -> dict:
    """Mean decrease in Gini impurity per feature, normalized to sum to 1.

    Each split contributes its sample-weighted impurity decrease divided by
    the tree's bootstrap size; a forest without any split yields all zeros.
    """
    total = np.zeros(forest.n_features)
    for tree in forest.trees:
        n_root = tree.counts[0].sum()
        split = tree.feature >= 0
        np.add.at(total, tree.feature[split], tree.gain[split] / n_root)
    s = total.sum()
    if s > 0:
        total = total / s
    names = feature_names if feature_names is not None else [f"x{i}" for i in range(forest.n_features)]
    return dict(zip(names, total.tolist()))
