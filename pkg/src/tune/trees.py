"""Axis-aligned regression trees fit by Newton steps on (gradient, hessian).

One builder serves both the random-forest surrogate (grad = -y, hess = 1,
so leaves hold the mean response and splits maximize SSE reduction) and the
boosted censored regressor (arbitrary per-sample grad/hess).
"""

from __future__ import annotations

import numpy as np

from tune import kernels


class RegressionTree:
    """Flat-array tree; feature[i] == -1 marks a leaf."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        idx = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feats = self.feature[idx]
            active = feats >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            node = idx[rows]
            go_left = X[rows, feats[rows]] <= self.threshold[node]
            idx[rows] = np.where(go_left, self.left[node], self.right[node])
        return self.value[idx]


def build_tree(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    max_depth: int,
    min_samples_leaf: int = 1,
    min_child_hess: float = 0.0,
) -> RegressionTree:
    """Grow a tree depth-first; leaf value is the Newton step -G/H."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    grad = np.ascontiguousarray(grad, dtype=np.float64)
    hess = np.ascontiguousarray(hess, dtype=np.float64)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def grow(rows: np.ndarray, depth: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(-grad[rows].sum() / hess[rows].sum())
        if depth >= max_depth:
            return node
        f, thr, gain = kernels.best_split(
            np.ascontiguousarray(X[rows]), grad[rows], hess[rows], min_samples_leaf,
            min_child_hess,
        )
        if f < 0 or gain <= 0.0:
            return node
        mask = X[rows, f] <= thr
        if not mask.any() or mask.all():  # fp-degenerate midpoint
            return node
        feature[node] = f
        threshold[node] = thr
        left[node] = grow(rows[mask], depth + 1)
        right[node] = grow(rows[~mask], depth + 1)
        return node

    grow(np.arange(X.shape[0]), 0)
    return RegressionTree(feature, threshold, left, right, value)
