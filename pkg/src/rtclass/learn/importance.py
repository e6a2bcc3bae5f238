"""Parameter ranking, per-feature importance and subcarrier-group accuracy."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..features import FEATURE_NAMES, featurize_dataset
from ..ingestion import Dataset
from ..preprocess import FILTER_GRID, N_GROUPS, canonical_parameter
from ..trace_model import Tech
from .evaluate import EvalReport, canonical_family, evaluate
from .forest import ForestConfig, feature_importance, train_forest


@dataclass(frozen=True)
class ParameterScore:
    parameter: str
    filter_name: str
    accuracy: float


@dataclass(frozen=True, eq=False)
class ParameterRanking:
    ranked: tuple[ParameterScore, ...]
    reports: tuple[EvalReport, ...]   # every (parameter, filter) cell, grid order

    def __len__(self):
        return len(self.ranked)

    def __iter__(self):
        return iter(self.ranked)

    def __getitem__(self, i):
        return self.ranked[i]


def evaluate_parameter(dataset: Dataset, family, parameter: str, filter_name: str,
                       config=None, k: int = 10, seed: int = 0) -> EvalReport:
    fm = featurize_dataset(dataset, parameter, filter_name)
    names = tuple(lab.value for lab in fm.classes)
    return evaluate(fm.X, fm.y, family, config, k, seed, len(fm.classes), names,
                    parameter=fm.parameter, filter_name=filter_name)


def rank_parameters(dataset: Dataset, family="rf", parameters: Sequence[str] = (),
                    filters: Sequence[str] = tuple(FILTER_GRID), config=None,
                    k: int = 10, seed: int = 0) -> ParameterRanking:
    """Evaluate each (parameter, filter) cell separately and rank parameters.

    Every parameter is represented by its best filter (ties go to the earlier
    filter in ``filters``); parameters are sorted by mean accuracy,
    descending, with ties broken by name.
    """
    reports = []
    best: dict[str, ParameterScore] = {}
    for p in parameters:
        p = canonical_parameter(p)
        for f in filters:
            rep = evaluate_parameter(dataset, family, p, f, config, k, seed)
            reports.append(rep)
            acc = rep.mean["accuracy"]
            if p not in best or acc > best[p].accuracy:
                best[p] = ParameterScore(p, f, acc)
    ranked = sorted(best.values(), key=lambda s: (-s.accuracy, s.parameter))
    return ParameterRanking(tuple(ranked), tuple(reports))


def forest_feature_importance(dataset: Dataset, parameter: str, filter_name: str = "f0",
                              config: ForestConfig = ForestConfig(), seed: int = 0) -> dict:
    """Train one forest on the whole dataset and return its Gini importances."""
    fm = featurize_dataset(dataset, parameter, filter_name)
    forest = train_forest(fm.X, fm.y, config, seed, len(fm.classes))
    return feature_importance(forest, FEATURE_NAMES)


def group_parameter(field: str, group: int) -> str:
    return f"{field.upper()}_AMP_G{group}"


def subcarrier_group_accuracy(dataset: Dataset, families: Sequence[str] = ("ann", "rf", "svm"),
                              field: str = "H", filter_name: str = "f0", configs=None,
                              k: int = 10, seed: int = 0) -> dict[str, dict[str, float]]:
    """Mean CV accuracy per subcarrier group ``G1..G8`` and model family."""
    if dataset.tech is not Tech.WLAN_CSI:
        raise ValueError("subcarrier groups exist only for WLAN CSI datasets")
    configs = configs or {}
    table: dict[str, dict[str, float]] = {}
    if not families:
        return table
    for g in range(1, N_GROUPS + 1):
        row = {}
        for fam in families:
            fam = canonical_family(fam)
            rep = evaluate_parameter(dataset, fam, group_parameter(field, g), filter_name,
                                     configs.get(fam), k, seed)
            row[fam] = rep.mean["accuracy"]
        table[f"G{g}"] = row
    return table
