from .cv import CvSplit, stratified_kfold
from .evaluate import (
    FAMILIES,
    EvalReport,
    canonical_family,
    evaluate,
    format_pm,
    format_table,
    train_model,
)
from .forest import ForestConfig, ForestModel, Tree, feature_importance, train_forest
from .importance import (
    ParameterRanking,
    ParameterScore,
    evaluate_parameter,
    forest_feature_importance,
    rank_parameters,
    subcarrier_group_accuracy,
)
from .metrics import SCORE_NAMES, classification_scores, confusion_matrix, scores_from_confusion
from .mlp import MlpConfig, MlpModel, MlpParams, train_mlp
from .persist import IntegrityError, load_model, model_digest, save_model
from .svm import SvmConfig, SvmModel, train_svm

__all__ = [
    "CvSplit", "stratified_kfold", "FAMILIES", "EvalReport", "canonical_family", "evaluate",
    "format_pm", "format_table", "train_model", "ForestConfig", "ForestModel", "Tree",
    "feature_importance", "train_forest", "ParameterRanking", "ParameterScore",
    "evaluate_parameter", "forest_feature_importance", "rank_parameters",
    "subcarrier_group_accuracy", "SCORE_NAMES", "classification_scores", "confusion_matrix",
    "scores_from_confusion", "MlpConfig", "MlpModel", "MlpParams", "train_mlp",
    "IntegrityError", "load_model", "model_digest", "save_model", "SvmConfig", "SvmModel",
    "train_svm",
]
