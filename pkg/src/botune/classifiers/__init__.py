"""From-scratch binary classifiers tuned by the optimizer."""

from .ensemble import (
    METHOD_ADABOOST,
    METHOD_BAGGING,
    METHODS,
    DecisionTree,
    EnsembleConfig,
    EnsembleModel,
    adaboost_stage_weight,
    ensemble_predict,
    ensemble_train,
    grow_tree,
)
from .knn import (
    DISTANCE_CITYBLOCK,
    DISTANCE_EUCLIDEAN,
    DISTANCE_MAHALANOBIS,
    DISTANCES,
    KnnConfig,
    KnnModel,
    knn_fit,
    knn_predict,
)
from .svm import SvmConfig, SvmModel, svm_decision, svm_predict, svm_train

__all__ = [
    "METHOD_ADABOOST",
    "METHOD_BAGGING",
    "METHODS",
    "DISTANCES",
    "DISTANCE_CITYBLOCK",
    "DISTANCE_EUCLIDEAN",
    "DISTANCE_MAHALANOBIS",
    "DecisionTree",
    "EnsembleConfig",
    "EnsembleModel",
    "KnnConfig",
    "KnnModel",
    "SvmConfig",
    "SvmModel",
    "adaboost_stage_weight",
    "ensemble_predict",
    "ensemble_train",
    "grow_tree",
    "knn_fit",
    "knn_predict",
    "svm_decision",
    "svm_predict",
    "svm_train",
]
