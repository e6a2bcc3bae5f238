"""Cross-validated evaluation and result reporting."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from ..seeding import child_seed
from .cv import stratified_kfold
from .forest import ForestConfig, train_forest
from .metrics import SCORE_NAMES, confusion_matrix, scores_from_confusion
from .mlp import MlpConfig, train_mlp
from .svm import SvmConfig, train_svm

FAMILIES = ("ann", "rf", "svm")
_ALIASES = {"mlp": "ann", "forest": "rf", "random_forest": "rf"}
SCORE_LABELS = {"accuracy": "Accuracy", "precision": "Precision",
                "recall": "Recall", "fscore": "F-Score"}

Trainer = Callable[[np.ndarray, np.ndarray, int], object]


def canonical_family(name: str) -> str:
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in FAMILIES:
        raise ValueError(f"unknown model family {name!r}; expected one of {', '.join(FAMILIES)}")
    return key


def default_config(family: str):
    return {"rf": ForestConfig(), "svm": SvmConfig(), "ann": MlpConfig()}[canonical_family(family)]


def train_model(family: str, X, y, config=None, seed: int = 0, n_classes: int | None = None):
    family = canonical_family(family)
    config = config if config is not None else default_config(family)
    if family == "rf":
        return train_forest(X, y, config, seed, n_classes)
    if family == "svm":
        return train_svm(X, y, config, seed, n_classes)
    return train_mlp(X, y, config, seed, n_classes)


def format_pm(mean: float, std: float) -> str:
    """``99.83±0.26`` style, trailing zeros dropped (``100±0``)."""
    def fmt(v):
        s = f"{v:.2f}".rstrip("0").rstrip(".")
        return "0" if s in ("-0", "") else s
    return f"{fmt(mean)}±{fmt(std)}"


@dataclass(frozen=True, eq=False)
class EvalReport:
    model: str
    parameter: str
    filter_name: str
    k: int
    seed: int
    classes: tuple[str, ...]
    fold_scores: Mapping[str, tuple[float, ...]]
    confusion: np.ndarray  # (k, c, c)

    @property
    def mean(self) -> dict[str, float]:
        return {s: float(np.mean(v)) for s, v in self.fold_scores.items()}

    @property
    def std(self) -> dict[str, float]:
        return {s: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
                for s, v in self.fold_scores.items()}

    def formatted(self, score: str) -> str:
        return format_pm(self.mean[score], self.std[score])

    @property
    def param_label(self) -> str:
        return f"{self.parameter} ({self.filter_name})" if self.filter_name else self.parameter

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "parameter": self.parameter,
            "filter": self.filter_name,
            "k": self.k,
            "seed": self.seed,
            "classes": list(self.classes),
            "folds": {s: list(self.fold_scores[s]) for s in SCORE_NAMES},
            "mean": {s: self.mean[s] for s in SCORE_NAMES},
            "std": {s: self.std[s] for s in SCORE_NAMES},
            "confusion": self.confusion.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def evaluate(X, y, family: Union[str, Trainer], config=None, k: int = 10, seed: int = 0,
             n_classes: int | None = None, class_names: Sequence[str] | None = None,
             parameter: str = "", filter_name: str = "") -> EvalReport:
    """Stratified k-fold CV: train on k-1 folds, score the held-out fold.

    ``family`` is ``"ann"``, ``"rf"``, ``"svm"`` or a callable
    ``trainer(X, y, seed)`` returning an object with ``predict``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    names = tuple(class_names) if class_names is not None else tuple(str(i) for i in range(n_classes))
    split = stratified_kfold(y, k, child_seed(seed, "cv"), class_names=names)
    if callable(family):
        trainer, model_name = family, getattr(family, "__name__", "custom")
    else:
        model_name = canonical_family(family)

        def trainer(Xt, yt, s):
            return train_model(model_name, Xt, yt, config, s, n_classes)

    per_fold = {s: [] for s in SCORE_NAMES}
    cms = []
    for i in range(split.k):
        train, test = split.train_test(i)
        model = trainer(X[train], y[train], child_seed(seed, "fold", i))
        cm = confusion_matrix(y[test], model.predict(X[test]), n_classes)
        cms.append(cm)
        for s, v in scores_from_confusion(cm).items():
            per_fold[s].append(v)
    return EvalReport(
        model=model_name, parameter=parameter, filter_name=filter_name, k=split.k,
        seed=seed, classes=names,
        fold_scores={s: tuple(v) for s, v in per_fold.items()},
        confusion=np.array(cms, dtype=np.int64))


def best_per_score(reports: Sequence[EvalReport]) -> dict[str, EvalReport]:
    """For each score, the report with the highest mean (first one on ties)."""
    best = {}
    for s in SCORE_NAMES:
        top = None
        for r in reports:
            if top is None or r.mean[s] > top.mean[s]:
                top = r
        best[s] = top
    return best


def format_table(reports: Mapping[str, Sequence[EvalReport]], title: str = "") -> str:
    """Fixed-width table: one block of four score rows per model family."""
    header = f"{'Model':<6} {'Score':<10} {'Value [%]':<16} {'Param.'}"
    lines = []
    if title:
        lines.append(title)
    lines += [header, "-" * len(header.rstrip())]
    for family, reps in reports.items():
        if not reps:
            continue
        best = best_per_score(reps)
        for j, s in enumerate(SCORE_NAMES):
            r = best[s]
            name = family.upper() if j == 0 else ""
            lines.append(f"{name:<6} {SCORE_LABELS[s]:<10} {r.formatted(s):<16} {r.param_label:<20}".rstrip())
    return "\n".join(lines) + "\n"

