"""Binary SVM with a Gaussian kernel, trained by sequential minimal optimization.

The dual problem is solved by deterministic two-coordinate ascent: pick a
KKT violator i, pair it with the j maximizing |E_i - E_j| (falling back
to a scan), and solve the two-variable subproblem analytically. The
prediction-error cache E is updated incrementally, so a full sweep costs
one vectorized KKT scan plus O(n) per successful step.

Kernel convention: K(u, v) = exp(-||u - v||^2 / (2 * gamma^2)), i.e. the
kernel scale divides the distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..data import Dataset
from ..errors import DataError

_ALPHA_EPS = 1e-10
_STEP_EPS = 1e-8
_MAX_SWEEPS = 2000


@dataclass(frozen=True)
class SvmConfig:
    c: float
    gamma: float
    tol: float = 1e-3
    max_passes: int = 10

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"box constraint must be positive, got {self.c}")
        if self.gamma <= 0:
            raise ValueError(f"kernel scale must be positive, got {self.gamma}")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i with y in {-1, +1}
    intercept: float
    kernel_scale: float
    n_features: int


def _rbf(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    d2 = cdist(a, b, metric="sqeuclidean")
    return np.exp(-d2 / (2.0 * gamma * gamma))


def svm_train(train: Dataset, config: SvmConfig) -> SvmModel:
    X = train.features
    if not np.isfinite(X).all():
        raise DataError("SVM training requires finite features")
    classes = np.unique(train.labels)
    if classes.size < 2:
        raise DataError("SVM training requires both classes present")
    y = np.where(train.labels == 1, 1.0, -1.0)
    n = X.shape[0]
    C, tol = config.c, config.tol

    K = _rbf(X, X, config.gamma)
    alpha = np.zeros(n)
    b = 0.0
    E = -y.copy()  # E_i = f(x_i) - y_i with f = 0 initially
    progress = 0.0  # total |delta alpha| within the current sweep

    def take_step(i: int, j: int) -> bool:
        nonlocal b, E, progress
        if i == j:
            return False
        ai, aj = alpha[i], alpha[j]
        yi, yj = y[i], y[j]
        if yi != yj:
            lo, hi = max(0.0, aj - ai), min(C, C + aj - ai)
        else:
            lo, hi = max(0.0, ai + aj - C), min(C, ai + aj)
        if hi - lo < _ALPHA_EPS:
            return False
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta <= 1e-12:
            return False
        aj_new = aj + yj * (E[i] - E[j]) / eta
        aj_new = min(hi, max(lo, aj_new))
        if abs(aj_new - aj) < _STEP_EPS * (aj_new + aj + _STEP_EPS):
            return False
        ai_new = ai + yi * yj * (aj - aj_new)

        b1 = b - E[i] - yi * (ai_new - ai) * K[i, i] - yj * (aj_new - aj) * K[i, j]
        b2 = b - E[j] - yi * (ai_new - ai) * K[i, j] - yj * (aj_new - aj) * K[j, j]
        if _ALPHA_EPS < ai_new < C - _ALPHA_EPS:
            b_new = b1
        elif _ALPHA_EPS < aj_new < C - _ALPHA_EPS:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        E += yi * (ai_new - ai) * K[i] + yj * (aj_new - aj) * K[j] + (b_new - b)
        alpha[i], alpha[j] = ai_new, aj_new
        b = b_new
        progress += abs(aj_new - aj)
        return True

    def examine(i: int) -> bool:
        r = E[i] * y[i]
        if not ((r < -tol and alpha[i] < C - _ALPHA_EPS) or (r > tol and alpha[i] > _ALPHA_EPS)):
            return False
        nonbound = np.flatnonzero((alpha > _ALPHA_EPS) & (alpha < C - _ALPHA_EPS))
        if nonbound.size > 1:
            j = int(nonbound[np.argmax(np.abs(E[nonbound] - E[i]))])
            if take_step(i, j):
                return True
        for j in nonbound:
            if take_step(i, int(j)):
                return True
        for j in range(n):
            if take_step(i, j):
                return True
        return False

    examine_all = True
    stalled = 0
    for _ in range(_MAX_SWEEPS):
        r = E * y
        violating = ((r < -tol) & (alpha < C - _ALPHA_EPS)) | ((r > tol) & (alpha > _ALPHA_EPS))
        if examine_all:
            candidates = np.flatnonzero(violating)
        else:
            candidates = np.flatnonzero(
                violating & (alpha > _ALPHA_EPS) & (alpha < C - _ALPHA_EPS)
            )
        changed = 0
        progress = 0.0
        for i in candidates:
            if examine(int(i)):
                changed += 1
        if examine_all and changed == 0:
            break  # no violators anywhere: KKT holds within tol
        stalled = stalled + 1 if (changed == 0 or progress < 1e-9) else 0
        if stalled >= config.max_passes:
            break
        examine_all = changed == 0 if not examine_all else False

    sv = alpha > _ALPHA_EPS
    return SvmModel(
        support_vectors=X[sv].copy(),
        dual_coef=(alpha * y)[sv],
        intercept=b,
        kernel_scale=config.gamma,
        n_features=X.shape[1],
    )


def svm_decision(model: SvmModel, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != model.n_features:
        raise DataError(
            f"dimension mismatch: model expects {model.n_features} features, got {points.shape[1]}"
        )
    if model.support_vectors.shape[0] == 0:
        return np.full(points.shape[0], model.intercept)
    K = _rbf(points, model.support_vectors, model.kernel_scale)
    return K @ model.dual_coef + model.intercept


def svm_predict(model: SvmModel, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Labels (1 iff decision > 0; ties go to class 0) plus decision values."""
    f = svm_decision(model, points)
    return (f > 0).astype(np.int64), f
