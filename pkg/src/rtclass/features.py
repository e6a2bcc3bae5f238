"""Descriptive statistics of preprocessed channel series."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .ingestion import Dataset
from .preprocess import ParameterError, canonical_parameter, parameter_series, preprocess_series
from .trace_model import Label

FEATURE_NAMES: tuple[str, ...] = (
    "min", "max", "range", "mean", "median", "std", "var", "sem", "mad", "iqr",
    "q05", "q25", "q75", "q95", "skewness", "kurtosis",
    "kstat1", "kstat2", "kstat3", "kstat4", "tmean", "tvar", "rms", "energy",
)
N_FEATURES = len(FEATURE_NAMES)
TRIM_PROPORTION = 0.1
MIN_LENGTH = 4


def _quantile_sorted(xs: np.ndarray, p: float) -> float:
    h = (xs.size - 1) * p
    lo = int(np.floor(h))
    hi = min(lo + 1, xs.size - 1)
    return float(xs[lo] + (h - lo) * (xs[hi] - xs[lo]))


def featurize(series, trim: float = TRIM_PROPORTION) -> np.ndarray:
    """Return the 24 statistics of ``series`` in ``FEATURE_NAMES`` order."""
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < MIN_LENGTH:
        raise ValueError(f"featurize needs at least {MIN_LENGTH} samples, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("featurize input contains NaN or infinite values")

    xs = np.sort(x)
    # a rounded mean can land an ulp outside the data range
    mean = min(max(x.mean(), xs[0]), xs[-1])
    d = x - mean
    d2 = d * d
    m2 = d2.mean()
    m3 = (d2 * d).mean()
    m4 = (d2 * d2).mean()
    # rounding noise of a constant series must not leak into shape statistics
    scale = max(abs(xs[0]), abs(xs[-1]))
    flat = m2 <= (16 * np.finfo(float).eps * scale) ** 2
    if flat:
        m2 = m3 = m4 = 0.0

    median = _quantile_sorted(xs, 0.5)
    q05, q25, q75, q95 = (_quantile_sorted(xs, p) for p in (0.05, 0.25, 0.75, 0.95))
    mad = float(np.median(np.abs(x - median)))
    std = np.sqrt(m2)
    var_unbiased = m2 * n / (n - 1)
    if flat:
        skew = kurt = 0.0
        k3 = k4 = 0.0
    else:
        skew = m3 / m2 ** 1.5
        kurt = m4 / (m2 * m2) - 3.0
        k3 = n * n * m3 / ((n - 1) * (n - 2))
        k4 = n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3))

    g = int(np.floor(trim * n))
    kept = xs[g:n - g]
    tmean = min(max(kept.mean(), kept[0]), kept[-1])
    tvar = ((kept - tmean) ** 2).sum() / (kept.size - 1)
    energy = (x * x).mean()

    return np.array([
        xs[0], xs[-1], xs[-1] - xs[0], mean, median, std, m2,
        np.sqrt(var_unbiased) / np.sqrt(n), mad, q75 - q25,
        q05, q25, q75, q95, skew, kurt,
        mean, var_unbiased, k3, k4, tmean, tvar, np.sqrt(energy), energy,
    ], dtype=float)


@dataclass(frozen=True)
class FeatureVector:
    trace_id: str
    parameter: str
    values: dict[str, float]
    label: Label | None = None


def feature_vector(series, trace_id: str = "", parameter: str = "",
                   label: Label | None = None) -> FeatureVector:
    vals = featurize(series)
    return FeatureVector(trace_id, parameter, dict(zip(FEATURE_NAMES, vals.tolist())), label)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray
    trace_ids: tuple[str, ...]
    classes: tuple[Label, ...]
    parameter: str
    filter_name: str

    @property
    def feature_names(self) -> tuple[str, ...]:
        return FEATURE_NAMES

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["trace_id", "label", *FEATURE_NAMES])
        for tid, yi, row in zip(self.trace_ids, self.y, self.X):
            w.writerow([tid, self.classes[yi].value, *(repr(float(v)) for v in row)])
        return out.getvalue()


class FeatureError(ValueError):
    pass


def featurize_dataset(dataset: Dataset, parameter: str, filter_name: str = "f0") -> FeatureMatrix:
    """Smooth, scale and featurize one parameter for every trace (dataset order)."""
    name = canonical_parameter(parameter)
    classes = tuple(dataset.labels)
    class_index = {lab: i for i, lab in enumerate(classes)}
    rows, ids, y = [], [], []
    for tr in dataset.traces:
        try:
            series = parameter_series(tr, name)
        except ParameterError as exc:
            raise FeatureError(str(exc)) from None
        try:
            rows.append(featurize(preprocess_series(series, filter_name)))
        except ValueError as exc:
            raise FeatureError(f"trace {tr.id!r}: {exc}") from None
        ids.append(tr.id)
        y.append(class_index[tr.label])
    X = np.vstack(rows) if rows else np.zeros((0, N_FEATURES))
    return FeatureMatrix(X, np.asarray(y, dtype=np.int64), tuple(ids), classes, name, filter_name)
