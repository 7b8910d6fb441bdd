"""Random-forest surrogate: bagged regression trees with per-tree mean/std.

The search uses the spread of individual tree predictions as the model's
uncertainty, so the forest exposes the full per-tree prediction matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tune.trees import RegressionTree, build_tree


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 12
    min_samples_leaf: int = 1
    bootstrap_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1:
            raise ValueError("n_trees and max_depth must be >= 1")
        if not 0.0 < self.bootstrap_fraction <= 1.0:
            raise ValueError("bootstrap_fraction must be in (0, 1]")


class ForestModel:
    def __init__(self, trees: list[RegressionTree], n_features: int):
        self.trees = trees
        self.n_features = n_features

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def tree_predictions(self, X: np.ndarray) -> np.ndarray:
        """(n_trees, n_points) matrix of per-tree predictions."""
        X = self._check(X)
        return np.stack([t.predict(X) for t in self.trees])

    def predict_mean_std(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        preds = self.tree_predictions(X)
        # population std: defined for a single tree and invariant to tree order
        return preds.mean(axis=0), preds.std(axis=0, ddof=0)


def fit_forest(X, y, params: ForestParams) -> ForestModel:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if n == 0 or len(y) != n:
        raise ValueError("need a non-empty training set with |X| == |y|")
    n_boot = max(1, int(round(params.bootstrap_fraction * n)))
    trees = []
    for t in range(params.n_trees):
        # per-tree seed keeps results independent of fit order / parallelism
        rng = np.random.default_rng([params.seed, t])
        rows = rng.integers(0, n, size=n_boot)
        trees.append(
            build_tree(
                X[rows],
                -y[rows],
                np.ones(n_boot),
                max_depth=params.max_depth,
                min_samples_leaf=params.min_samples_leaf,
            )
        )
    return ForestModel(trees, X.shape[1])
