"""k-nearest-neighbor classifier with Euclidean, Mahalanobis, or cityblock distance.

Tie rules are fixed for determinism: equal distances rank by lower
training-row index (stable sort), and an even vote is decided by the
single nearest neighbor's class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import cdist

from ..data import Dataset
from ..errors import DataError, NumericalError

DISTANCE_EUCLIDEAN = "euclidean"
DISTANCE_MAHALANOBIS = "mahalanobis"
DISTANCE_CITYBLOCK = "cityblock"
DISTANCES = (DISTANCE_EUCLIDEAN, DISTANCE_MAHALANOBIS, DISTANCE_CITYBLOCK)


@dataclass(frozen=True)
class KnnConfig:
    k: int
    distance: str = DISTANCE_EUCLIDEAN
    covariance_ridge: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.distance not in DISTANCES:
            raise ValueError(f"distance must be one of {DISTANCES}, got {self.distance!r}")
        if self.covariance_ridge < 0:
            raise ValueError("covariance_ridge must be non-negative")


@dataclass
class KnnModel:
    x_train: np.ndarray
    y_train: np.ndarray
    k: int
    distance: str
    inv_covariance: np.ndarray | None = None


def knn_fit(train: Dataset, config: KnnConfig) -> KnnModel:
    X, y = train.features, train.labels
    if config.k > X.shape[0]:
        raise DataError(f"k={config.k} exceeds the {X.shape[0]} training rows")
    inv_cov = None
    if config.distance == DISTANCE_MAHALANOBIS:
        cov = np.atleast_2d(np.cov(X, rowvar=False))
        cov = cov + config.covariance_ridge * np.eye(cov.shape[0])
        try:
            factor = cho_factor(cov)
        except np.linalg.LinAlgError:
            raise NumericalError(
                "training covariance is singular; set covariance_ridge to a positive value"
            )
        inv_cov = cho_solve(factor, np.eye(cov.shape[0]))
        inv_cov = 0.5 * (inv_cov + inv_cov.T)  # keep it symmetric despite rounding
    return KnnModel(
        x_train=X.copy(),
        y_train=y.copy(),
        k=config.k,
        distance=config.distance,
        inv_covariance=inv_cov,
    )


def _distances(model: KnnModel, points: np.ndarray) -> np.ndarray:
    if model.distance == DISTANCE_EUCLIDEAN:
        return cdist(points, model.x_train, metric="sqeuclidean")
    if model.distance == DISTANCE_CITYBLOCK:
        return cdist(points, model.x_train, metric="cityblock")
    return cdist(points, model.x_train, metric="mahalanobis", VI=model.inv_covariance)


def knn_predict(model: KnnModel, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != model.x_train.shape[1]:
        raise DataError(
            f"dimension mismatch: model expects {model.x_train.shape[1]} features, "
            f"got {points.shape[1]}"
        )
    dist = _distances(model, points)
    nearest = np.argsort(dist, axis=1, kind="stable")[:, : model.k]
    votes = model.y_train[nearest]
    ones = votes.sum(axis=1)
    zeros = model.k - ones
    labels = np.where(ones > zeros, 1, 0)
    tied = ones == zeros
    if np.any(tied):
        labels[tied] = votes[tied, 0]  # even split: defer to the nearest neighbor
    return labels.astype(np.int64)
