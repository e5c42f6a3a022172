"""Tree ensembles: bootstrap-aggregated forests and AdaBoost.M1 boosting.

Trees are binary, axis-aligned, grown best-first on weighted Gini
impurity with candidate thresholds at midpoints of consecutive distinct
feature values, and never pruned. ``max_splits`` caps the number of
internal nodes. Bagging draws a size-N bootstrap per tree and subsamples
``m_try`` variables per node; AdaBoost grows each tree on the full
sample with stagewise weights and no variable subsampling.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset
from ..errors import DataError

METHOD_BAGGING = "bagging"
METHOD_ADABOOST = "adaboost"
METHODS = (METHOD_BAGGING, METHOD_ADABOOST)

_ERR_CLAMP = 1e-10


@dataclass(frozen=True)
class EnsembleConfig:
    method: str
    n_trees: int = 100
    max_splits: int = 1
    m_try: int | None = None  # bagging only; defaults to ceil(sqrt(M)) at fit time

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.max_splits < 1:
            raise ValueError("max_splits must be at least 1")
        if self.m_try is not None and self.m_try < 1:
            raise ValueError("m_try must be at least 1")


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    label: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class DecisionTree:
    root: _Node
    n_splits: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[0], dtype=np.int64)
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if node.is_leaf:
                out[idx] = node.label
                continue
            go_left = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out


def _majority(y: np.ndarray, w: np.ndarray) -> int:
    w1 = float(w[y == 1].sum())
    w0 = float(w.sum()) - w1
    return 1 if w1 > w0 else 0


def _gini(w_total: float, w_one: float) -> float:
    if w_total <= 0:
        return 0.0
    p = w_one / w_total
    return 2.0 * p * (1.0 - p)


def _best_split(X, y, w, idx, features):
    """Best (feature, threshold) by total weighted impurity decrease.

    Returns (decrease, feature, threshold) or None when no split helps.
    Ties resolve to the lowest feature index, then the lowest threshold.
    """
    sub_w = w[idx]
    sub_y = y[idx]
    w_total = float(sub_w.sum())
    w_one = float(sub_w[sub_y == 1].sum())
    parent = w_total * _gini(w_total, w_one)
    if parent <= 0:
        return None
    best = None
    for f in features:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs_o = xs[order]
        wo = sub_w[order]
        w1o = wo * sub_y[order]
        cw = np.cumsum(wo)
        cw1 = np.cumsum(w1o)
        cuts = np.flatnonzero(xs_o[:-1] < xs_o[1:])
        if cuts.size == 0:
            continue
        lw, lw1 = cw[cuts], cw1[cuts]
        rw, rw1 = w_total - lw, (cw1[-1] - lw1)
        with np.errstate(divide="ignore", invalid="ignore"):
            pl = np.where(lw > 0, lw1 / np.where(lw > 0, lw, 1.0), 0.0)
            pr = np.where(rw > 0, rw1 / np.where(rw > 0, rw, 1.0), 0.0)
        child = lw * 2.0 * pl * (1.0 - pl) + rw * 2.0 * pr * (1.0 - pr)
        dec = parent - child
        pos = int(np.argmax(dec))
        if dec[pos] > 1e-12 and (best is None or dec[pos] > best[0] + 1e-15):
            threshold = 0.5 * (xs_o[cuts[pos]] + xs_o[cuts[pos] + 1])
            best = (float(dec[pos]), int(f), float(threshold))
    return best


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    max_splits: int,
    m_try: int | None = None,
    rng: np.random.Generator | None = None,
) -> DecisionTree:
    """Grow a tree best-first: always split the frontier leaf with the
    largest weighted impurity decrease until the split budget runs out."""
    n_features = X.shape[1]

    def pick_features():
        if m_try is None or m_try >= n_features:
            return np.arange(n_features)
        return np.sort(rng.choice(n_features, size=m_try, replace=False))

    root = _Node(label=_majority(y, w))
    counter = 0
    frontier: list = []
    split = _best_split(X, y, w, np.arange(X.shape[0]), pick_features())
    if split is not None:
        heapq.heappush(frontier, (-split[0], counter, root, np.arange(X.shape[0]), split))
        counter += 1
    n_splits = 0
    while frontier and n_splits < max_splits:
        _, _, node, idx, (dec, f, thr) = heapq.heappop(frontier)
        node.feature = f
        node.threshold = thr
        mask = X[idx, f] <= thr
        for child_idx in (idx[mask], idx[~mask]):
            child = _Node(label=_majority(y[child_idx], w[child_idx]))
            child_split = _best_split(X, y, w, child_idx, pick_features())
            if child_split is not None:
                heapq.heappush(frontier, (-child_split[0], counter, child, child_idx, child_split))
                counter += 1
            if node.left is None:
                node.left = child
            else:
                node.right = child
        n_splits += 1
    # Anything left on the frontier stays a leaf.
    return DecisionTree(root=root, n_splits=n_splits)


@dataclass
class EnsembleModel:
    trees: list[DecisionTree]
    tree_weights: np.ndarray  # all ones for bagging; stage weights for adaboost
    method: str
    n_features: int


def adaboost_stage_weight(weighted_error: float) -> float:
    err = min(max(weighted_error, _ERR_CLAMP), 1.0 - _ERR_CLAMP)
    return 0.5 * np.log((1.0 - err) / err)


def ensemble_train(
    train: Dataset,
    config: EnsembleConfig,
    seed: int,
    _identity_bootstrap: bool = False,
) -> EnsembleModel:
    """Train a bagged forest or an AdaBoost.M1 ensemble.

    ``_identity_bootstrap`` is a test hook that replaces each bootstrap
    with the untouched training sample.
    """
    X, y = train.features, train.labels
    if np.unique(y).size < 2:
        raise DataError("ensemble training requires both classes present")
    n, M = X.shape

    if config.method == METHOD_BAGGING:
        m_try = config.m_try if config.m_try is not None else int(np.ceil(np.sqrt(M)))
        if m_try > M:
            raise DataError(f"m_try={m_try} exceeds the {M} input variables")
        streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(config.n_trees)]
        trees = []
        for rng in streams:
            idx = np.arange(n) if _identity_bootstrap else rng.integers(0, n, size=n)
            tree = grow_tree(
                X[idx], y[idx], np.ones(idx.size), config.max_splits, m_try=m_try, rng=rng
            )
            trees.append(tree)
        weights = np.ones(len(trees))
    else:
        w = np.full(n, 1.0 / n)
        trees = []
        stage_weights = []
        for _ in range(config.n_trees):
            tree = grow_tree(X, y, w, config.max_splits)
            pred = tree.predict(X)
            miss = pred != y
            beta = adaboost_stage_weight(float(w[miss].sum()))
            trees.append(tree)
            stage_weights.append(beta)
            w = w * np.exp(np.where(miss, beta, -beta))
            w = w / w.sum()
        weights = np.asarray(stage_weights)

    return EnsembleModel(trees=trees, tree_weights=weights, method=config.method, n_features=M)


def ensemble_predict(model: EnsembleModel, points: np.ndarray) -> np.ndarray:
    """Majority vote (bagging) or weighted sign vote (adaboost); ties -> class 0."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != model.n_features:
        raise DataError(
            f"dimension mismatch: model expects {model.n_features} features, got {points.shape[1]}"
        )
    votes = np.stack([t.predict(points) for t in model.trees])
    if model.method == METHOD_BAGGING:
        ones = votes.sum(axis=0)
        return (ones * 2 > len(model.trees)).astype(np.int64)
    score = model.tree_weights @ (2.0 * votes - 1.0)
    return (score > 0).astype(np.int64)
