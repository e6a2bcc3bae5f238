"""Pure-numpy reference kernels."""
import numpy as np


def best_split(Xf, y, n_classes):
    """Best Gini split over the columns of ``Xf``.

    Xf : (m, k) float64, candidate feature values of the node's samples
    y : (m,) int64 class ids in ``[0, n_classes)``

    Returns ``(column, threshold, score)`` where ``score`` is
    ``sum(left**2)/n_left + sum(right**2)/n_right`` over class counts (larger
    is purer).  ``column`` is -1 when no column has two distinct values.
    Ties keep the earliest column, then the lowest threshold.
    """
    m, k = Xf.shape
    best_col, best_thr, best_score = -1, 0.0, -np.inf
    if m < 2:
        return best_col, best_thr, best_score
    rows = np.arange(m)
    n_left = np.arange(1, m, dtype=np.float64)
    n_right = m - n_left
    total = np.bincount(y, minlength=n_classes).astype(np.float64)
    for j in range(k):
        order = np.argsort(Xf[:, j], kind="mergesort")
        v = Xf[order, j]
        onehot = np.zeros((m, n_classes))
        onehot[rows, y[order]] = 1.0
        left = np.cumsum(onehot, axis=0)[:-1]
        right = total - left
        score = (left * left).sum(axis=1) / n_left + (right * right).sum(axis=1) / n_right
        score[~(v[:-1] < v[1:])] = -np.inf
        p = int(np.argmax(score))
        if score[p] > best_score:
            a, b = v[p], v[p + 1]
            thr = (a + b) / 2.0
            if not thr < b:
                thr = a
            best_col, best_thr, best_score = j, float(thr), float(score[p])
    return best_col, best_thr, best_score


def predict_tree(X, feature, threshold, left, right, leaf_class):
    """Class of each row of ``X``; nodes with ``feature < 0`` are leaves."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = feature[node] >= 0
    while active.any():
        idx = np.flatnonzero(active)
        nd = node[idx]
        go_left = X[idx, feature[nd]] <= threshold[nd]
        node[idx] = np.where(go_left, left[nd], right[nd])
        active[idx] = feature[node[idx]] >= 0
    return leaf_class[node]


def pegasos_train(X, y, lam, order):
    """Pegasos stochastic sub-gradient descent on hinge loss + L2.

    ``y`` holds +1/-1, ``order`` the sample index for each step; the step
    size at step t (1-based) is ``1 / (lam * t)``.  Returns the weight vector.
    """
    w = np.zeros(X.shape[1])
    for t in range(1, order.shape[0] + 1):
        i = order[t - 1]
        eta = 1.0 / (lam * t)
        margin = y[i] * np.dot(w, X[i])
        w *= 1.0 - eta * lam
        if margin < 1.0:
            w += (eta * y[i]) * X[i]
    return w
