"""Gaussian-process regression over encoded points in the unit box.

Supports ARD squared-exponential and Matern-5/2 kernels. Fitting centers
the observations, factorizes K + sigma_n^2 I by Cholesky (escalating a
diagonal jitter from 1e-10 to 1e-4 only if the factorization fails), and
exposes posterior moments plus the log marginal likelihood. Kernel
hyperparameters are selected by multi-start coordinate-wise golden-section
search on the log marginal likelihood over log-parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.spatial.distance import cdist

from .errors import NumericalError

KERNEL_SQEXP = "sqexp"
KERNEL_MATERN52 = "matern52"
KERNEL_FAMILIES = (KERNEL_SQEXP, KERNEL_MATERN52)

_JITTER_START = 1e-10
_JITTER_MAX = 1e-4


@dataclass(frozen=True)
class KernelSpec:
    """ARD kernel hyperparameters: one lengthscale per encoded dimension."""

    family: str
    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"kernel family must be one of {KERNEL_FAMILIES}")
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=np.float64))
        object.__setattr__(self, "lengthscales", ls)
        if not np.isfinite(ls).all() or np.any(ls <= 0):
            raise ValueError("lengthscales must be finite and positive")
        if not np.isfinite(self.signal_variance) or self.signal_variance <= 0:
            raise ValueError("signal_variance must be finite and positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")


def _scaled_sqdist(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return cdist(a / spec.lengthscales, b / spec.lengthscales, metric="sqeuclidean")


def kernel_matrix(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = _scaled_sqdist(spec, np.atleast_2d(a), np.atleast_2d(b))
    if spec.family == KERNEL_SQEXP:
        return spec.signal_variance * np.exp(-0.5 * d2)
    r = np.sqrt(np.maximum(d2, 0.0))
    sqrt5_r = np.sqrt(5.0) * r
    return spec.signal_variance * (1.0 + sqrt5_r + (5.0 / 3.0) * d2) * np.exp(-sqrt5_r)


def kernel_eval(spec: KernelSpec, u: np.ndarray, v: np.ndarray) -> float:
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(kernel_matrix(spec, u[None, :], v[None, :])[0, 0])


@dataclass(frozen=True)
class PosteriorMoments:
    mean: float
    sd: float


@dataclass
class GpModel:
    """Fitted posterior: Cholesky factor of K + sigma_n^2 I plus weights.

    With zero training points the model falls back to the prior
    (mean 0, sd sigma_f).
    """

    x_train: np.ndarray
    y_train: np.ndarray
    spec: KernelSpec
    chol_lower: np.ndarray | None
    weights: np.ndarray | None
    y_mean: float

    @property
    def n_train(self) -> int:
        return self.x_train.shape[0]


def _chol_with_jitter(K: np.ndarray, noise_variance: float) -> np.ndarray:
    """Lower Cholesky of K + noise*I, escalating jitter only on failure."""
    n = K.shape[0]
    base = K + noise_variance * np.eye(n)
    try:
        return cholesky(base, lower=True)
    except np.linalg.LinAlgError:
        pass
    jitter = _JITTER_START
    while jitter <= _JITTER_MAX:
        try:
            return cholesky(base + jitter * np.eye(n), lower=True)
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericalError(
        f"covariance factorization failed even with jitter {_JITTER_MAX:g}"
    )


def gp_fit(X: np.ndarray, y: np.ndarray, spec: KernelSpec) -> GpModel:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if y.size == 0:
        return GpModel(
            x_train=np.empty((0, spec.lengthscales.size)),
            y_train=y,
            spec=spec,
            chol_lower=None,
            weights=None,
            y_mean=0.0,
        )
    if X.shape[0] != y.size:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.size} entries")
    y_mean = float(y.mean())
    K = kernel_matrix(spec, X, X)
    L = _chol_with_jitter(K, spec.noise_variance)
    centered = y - y_mean
    weights = solve_triangular(L.T, solve_triangular(L, centered, lower=True), lower=False)
    return GpModel(X.copy(), y.copy(), spec, L, weights, y_mean)


def gp_posterior_batch(model: GpModel, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and sd at each query row; variance clamped at 0."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = model.spec.lengthscales.size
    if points.shape[1] != d:
        raise ValueError(f"dimension mismatch: expected {d} coordinates, got {points.shape[1]}")
    prior_var = model.spec.signal_variance
    if model.n_train == 0:
        n = points.shape[0]
        return np.zeros(n), np.full(n, np.sqrt(prior_var))
    k_star = kernel_matrix(model.spec, model.x_train, points)
    mean = model.y_mean + k_star.T @ model.weights
    v = solve_triangular(model.chol_lower, k_star, lower=True)
    var = prior_var - np.einsum("ij,ij->j", v, v)
    return mean, np.sqrt(np.maximum(var, 0.0))


def gp_posterior(model: GpModel, x: np.ndarray) -> PosteriorMoments:
    mean, sd = gp_posterior_batch(model, np.atleast_1d(np.asarray(x, dtype=np.float64))[None, :])
    return PosteriorMoments(mean=float(mean[0]), sd=float(sd[0]))


def log_marginal_likelihood(X: np.ndarray, y: np.ndarray, spec: KernelSpec) -> float:
    """log p(y | X, theta) of the mean-centered observations."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    n = y.size
    centered = y - y.mean()
    K = kernel_matrix(spec, X, X)
    L = _chol_with_jitter(K, spec.noise_variance)
    v = solve_triangular(L, centered, lower=True)  # y^T K^-1 y = ||L^-1 y||^2
    return float(-0.5 * v @ v - np.log(np.diag(L)).sum() - 0.5 * n * np.log(2.0 * np.pi))


def _golden_max(fn, lo: float, hi: float, iters: int = 16) -> float:
    """Deterministic golden-section maximization of fn over [lo, hi]."""
    if hi - lo < 1e-15:
        return lo
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return c if fc > fd else d


def fit_kernel_hyperparams(
    X: np.ndarray,
    y: np.ndarray,
    family: str = KERNEL_MATERN52,
    seed: int = 0,
    n_starts: int = 8,
    n_sweeps: int = 2,
) -> KernelSpec:
    """Select kernel hyperparameters by maximizing the log marginal likelihood.

    Multi-start coordinate-wise golden-section search over the log of
    (lengthscales, signal variance, noise variance). Start 0 is a fixed
    heuristic; the remaining starts are drawn log-uniform inside the
    bounds from the seeded generator. Deterministic under the seed; ties
    resolve to the lowest start index.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if y.size < 2:
        raise ValueError("hyperparameter fitting needs at least 2 observations")
    d = X.shape[1]
    var_y = float(np.var(y))

    lo = np.log(np.concatenate([np.full(d, 1e-3), [1e-6, 1e-10]]))
    hi = np.log(np.concatenate([np.full(d, 10.0), [100.0 * var_y + 1e-6, var_y + 1e-10]]))

    def lml_of(theta: np.ndarray) -> float:
        params = np.exp(theta)
        spec = KernelSpec(
            family=family,
            lengthscales=params[:d],
            signal_variance=float(params[d]),
            noise_variance=float(params[d + 1]),
        )
        try:
            return log_marginal_likelihood(X, y, spec)
        except NumericalError:
            return -np.inf

    heuristic = np.concatenate(
        [np.full(d, 0.3), [max(var_y, 1e-6), max(0.01 * var_y, 1e-9)]]
    )
    rng = np.random.default_rng(seed)
    starts = [np.clip(np.log(heuristic), lo, hi)]
    for _ in range(n_starts - 1):
        starts.append(rng.uniform(lo, hi))

    best_theta = None
    best_lml = -np.inf
    for theta in starts:
        theta = theta.copy()
        for sweep in range(n_sweeps):
            for j in range(d + 2):
                def along(v, j=j, theta=theta):
                    t = theta.copy()
                    t[j] = v
                    return lml_of(t)

                theta[j] = _golden_max(along, lo[j], hi[j])
            # Abandon starts that are far behind after the first sweep.
            if sweep == 0 and lml_of(theta) < best_lml - 30.0:
                break
        score = lml_of(theta)
        if score > best_lml:
            best_lml = score
            best_theta = theta
    if best_theta is None or not np.isfinite(best_lml):
        raise NumericalError("all hyperparameter starts failed to factorize")
    params = np.exp(best_theta)
    return KernelSpec(
        family=family,
        lengthscales=params[:d],
        signal_variance=float(params[d]),
        noise_variance=float(params[d + 1]),
    )
