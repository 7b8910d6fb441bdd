"""Newton-step gradient boosting shared by the censored and standard regressors.

Each round fits one regression tree to per-sample (gradient, hessian) pairs;
leaf values are -sum(grad)/sum(hess), scaled by the learning rate.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from tune.trees import RegressionTree, build_tree

HESS_FLOOR = 1e-6


def newton_boost(
    X: np.ndarray,
    grad_hess: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    base_score: float,
    num_rounds: int,
    learning_rate: float,
    max_depth: int,
    min_samples_leaf: int = 1,
    min_child_hess: float = 1.0,
) -> list[RegressionTree]:
    """Boost trees against grad_hess(pred), starting from a constant base_score.

    min_child_hess keeps leaves with a vanishing hessian sum from being split
    out; for a censored survival term this is what stops the running sample's
    prediction from being pushed arbitrarily far above its elapsed value.
    """
    if num_rounds < 1:
        raise ValueError("num_rounds must be >= 1")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    pred = np.full(X.shape[0], base_score)
    trees: list[RegressionTree] = []
    for _ in range(num_rounds):
        g, h = grad_hess(pred)
        h = np.maximum(h, HESS_FLOOR)
        tree = build_tree(X, g, h, max_depth=max_depth, min_samples_leaf=min_samples_leaf,
                          min_child_hess=min_child_hess)
        trees.append(tree)
        pred = pred + learning_rate * tree.predict(X)
    return trees


def boosted_predict(
    trees: list[RegressionTree], base_score: float, learning_rate: float, X: np.ndarray
) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    pred = np.full(X.shape[0], base_score)
    for tree in trees:
        pred = pred + learning_rate * tree.predict(X)
    return pred


class GBTRegressor:
    """Plain squared-error boosted trees (the standard-regression baseline)."""

    def __init__(self, num_rounds=20, learning_rate=0.25, max_depth=6, min_samples_leaf=1):
        self.num_rounds = num_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.base_score = 0.0
        self.trees: list[RegressionTree] = []

    def fit(self, X, y):
        y = np.asarray(y, dtype=np.float64)
        if y.size == 0:
            raise ValueError("empty training set")
        self.base_score = float(y.mean())
        self.trees = newton_boost(
            X,
            lambda pred: (pred - y, np.ones_like(y)),
            self.base_score,
            self.num_rounds,
            self.learning_rate,
            self.max_depth,
            self.min_samples_leaf,
        )
        return self

    def predict(self, X) -> np.ndarray:
        return boosted_predict(self.trees, self.base_score, self.learning_rate, X)
