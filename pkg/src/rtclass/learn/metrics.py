"""Classification scores in percent, computed exactly from a confusion matrix."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

SCORE_NAMES = ("accuracy", "precision", "recall", "fscore")


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true, dtype=np.int64), np.asarray(y_pred, dtype=np.int64)), 1)
    return cm


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def scores_from_confusion(cm: np.ndarray) -> dict[str, float]:
    """Accuracy and macro-averaged precision/recall/F1, in percent.

    Empty denominators count as zero; macro F1 is the mean of per-class F1.
    Rational arithmetic keeps the result independent of summation order.
    """
    cm = np.asarray(cm, dtype=np.int64)
    c = cm.shape[0]
    total = int(cm.sum())
    acc = _ratio(int(np.trace(cm)), total)
    precision, recall, f1 = [], [], []
    for i in range(c):
        tp = int(cm[i, i])
        p = _ratio(tp, int(cm[:, i].sum()))
        r = _ratio(tp, int(cm[i, :].sum()))
        precision.append(p)
        recall.append(r)
        f1.append(2 * p * r / (p + r) if p + r else Fraction(0))
    return {
        "accuracy": float(100 * acc),
        "precision": float(100 * sum(precision) / c),
        "recall": float(100 * sum(recall) / c),
        "fscore": float(100 * sum(f1) / c),
    }


def classification_scores(y_true, y_pred, n_classes: int) -> dict[str, float]:
    return scores_from_confusion(confusion_matrix(y_true, y_pred, n_classes))
