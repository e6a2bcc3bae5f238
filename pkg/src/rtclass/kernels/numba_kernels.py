"""numba-compiled kernels; semantics mirror ``numpy_kernels``."""
import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def _best_split(Xf, y, n_classes):
    m, k = Xf.shape
    best_col, best_thr, best_score = -1, 0.0, -np.inf
    if m < 2:
        return best_col, best_thr, best_score
    total = np.zeros(n_classes)
    for i in range(m):
        total[y[i]] += 1.0
    left = np.empty(n_classes)
    for j in range(k):
        col = Xf[:, j].copy()
        order = np.argsort(col, kind="mergesort")
        left[:] = 0.0
        for i in range(m - 1):
            left[y[order[i]]] += 1.0
            a = col[order[i]]
            b = col[order[i + 1]]
            if not a < b:
                continue
            sl = 0.0
            sr = 0.0
            for c in range(n_classes):
                r = total[c] - left[c]
                sl += left[c] * left[c]
                sr += r * r
            nl = float(i + 1)
            score = sl / nl + sr / (m - nl)
            if score > best_score:
                thr = (a + b) / 2.0
                if not thr < b:
                    thr = a
                best_col, best_thr, best_score = j, thr, score
    return best_col, best_thr, best_score


def best_split(Xf, y, n_classes):
    col, thr, score = _best_split(
        np.ascontiguousarray(Xf, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64), int(n_classes))
    return int(col), float(thr), float(score)


@njit(**_opts)
def _predict_tree(X, feature, threshold, left, right, leaf_class):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for s in range(n):
        node = 0
        while feature[node] >= 0:
            if X[s, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[s] = leaf_class[node]
    return out


def predict_tree(X, feature, threshold, left, right, leaf_class):
    return _predict_tree(np.ascontiguousarray(X, dtype=np.float64), feature,
                         threshold, left, right, leaf_class)


@njit(**_opts)
def _pegasos_train(X, y, lam, order):
    d = X.shape[1]
    w = np.zeros(d)
    for t in range(1, order.shape[0] + 1):
        i = order[t - 1]
        eta = 1.0 / (lam * t)
        margin = 0.0
        for j in range(d):
            margin += w[j] * X[i, j]
        margin *= y[i]
        shrink = 1.0 - eta * lam
        step = eta * y[i]
        for j in range(d):
            w[j] *= shrink
        if margin < 1.0:
            for j in range(d):
                w[j] += step * X[i, j]
    return w


def pegasos_train(X, y, lam, order):
    return _pegasos_train(np.ascontiguousarray(X, dtype=np.float64),
                          np.ascontiguousarray(y, dtype=np.float64), float(lam),
                          np.ascontiguousarray(order, dtype=np.int64))
