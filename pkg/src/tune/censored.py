"""Boosted accelerated-failure-time regression over right-censored samples.

The model lives in log space: log z = g(x) + scale * eps, with eps either
standard normal or extreme-value distributed. Finished samples contribute a
density term to the negative log-likelihood; a still-running sample whose
elapsed value is tau contributes the survival term -log S((log tau - g)/scale),
which pushes the prediction above the elapsed value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import gamma as sp_gamma
from scipy.stats import norm

from tune.boosting import HESS_FLOOR, boosted_predict, newton_boost
from tune.trees import RegressionTree

NORMAL = "normal"
EXTREME = "extreme"

# cross-validated ranges for the noise scale and step size; the scale
# reflects prediction error (model error included), so the low end matters
# on clean surfaces where sharp predictions shrink the late-kill band
SCALE_GRID = (0.1, 0.2, 0.3, 0.4)
LEARNING_RATE_GRID = (0.2, 0.25, 0.3)

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
_EXP_CLIP = 30.0  # e^z cap; far outside the usable z range either way


@dataclass(frozen=True)
class CensoredSample:
    features: np.ndarray
    value: float  # final value, or the elapsed (censoring) threshold if censored
    censored: bool = False

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("behavior values must be positive")


@dataclass(frozen=True)
class AftParams:
    noise_distribution: str = EXTREME
    distribution_scale: float = 0.3
    learning_rate: float = 0.25
    num_boost_round: int = 20
    max_depth: int = 6
    # A leaf holding only a censored sample has no likelihood minimum — its
    # survival term keeps pushing the prediction up, one scale-sized Newton
    # step per round. Two samples per leaf anchors the running sample to a
    # finished neighbor, whose density term bounds the inflation.
    min_samples_leaf: int = 2
    # Backstop against all-censored leaves (possible only when several
    # censored samples are fit together): once a leaf's hessian sum e^z/scale^2
    # falls below this, the leaf cannot be split out and the push-up stops.
    # Kept small so that finished samples far below the current prediction,
    # whose hessians also vanish, can still be split off and fit.
    min_child_weight: float = 0.25
    base_score: float | None = None  # None: mean of log uncensored values

    def __post_init__(self):
        if self.noise_distribution not in (NORMAL, EXTREME):
            raise ValueError(f"unknown distribution {self.noise_distribution!r}")
        if not self.distribution_scale > 0:
            raise ValueError("distribution_scale must be > 0")
        if self.num_boost_round < 1:
            raise ValueError("num_boost_round must be >= 1")


def _z(g, log_value, scale):
    return (log_value - g) / scale


def _nll_vec(g, log_value, censored, dist, scale):
    z = _z(g, log_value, scale)
    if dist == NORMAL:
        density = 0.5 * z * z + _LOG_SQRT_2PI + np.log(scale) + log_value
        survival = -norm.logsf(z)
    else:
        ez = np.exp(np.minimum(z, _EXP_CLIP))
        density = -z + ez + np.log(scale) + log_value
        survival = ez
    return np.where(censored, survival, density)


def _grad_hess_vec(g, log_value, censored, dist, scale):
    z = _z(g, log_value, scale)
    if dist == NORMAL:
        g_unc = -z / scale
        h_unc = np.full_like(z, 1.0 / scale**2)
        # hazard phi/S evaluated in log space to stay finite deep in the tail
        log_phi = -0.5 * z * z - _LOG_SQRT_2PI
        hazard = np.exp(log_phi - norm.logsf(z))
        g_cen = -hazard / scale
        h_cen = hazard * (hazard - z) / scale**2
    else:
        ez = np.exp(np.minimum(z, _EXP_CLIP))
        g_unc = (1.0 - ez) / scale
        h_unc = ez / scale**2
        g_cen = -ez / scale
        h_cen = ez / scale**2
    grad = np.where(censored, g_cen, g_unc)
    hess = np.maximum(np.where(censored, h_cen, h_unc), HESS_FLOOR)
    return grad, hess


def aft_nll(g: float, sample: CensoredSample, dist: str, scale: float) -> float:
    """Per-sample negative log-likelihood at predicted log value g."""
    if not scale > 0:
        raise ValueError("scale must be > 0")
    return float(
        _nll_vec(
            np.float64(g), np.log(sample.value), np.array(sample.censored), dist, scale
        )
    )


def aft_grad_hess(g: float, sample: CensoredSample, dist: str, scale: float) -> tuple[float, float]:
    """First and second derivative of aft_nll in g (hessian floored at 1e-6)."""
    if not scale > 0:
        raise ValueError("scale must be > 0")
    grad, hess = _grad_hess_vec(
        np.float64(g), np.log(sample.value), np.array(sample.censored), dist, scale
    )
    return float(grad), float(hess)


class AftModel:
    def __init__(self, base_score: float, trees: list[RegressionTree], params: AftParams,
                 n_features: int):
        self.base_score = base_score
        self.trees = trees
        self.params = params
        self.n_features = n_features

    def _check(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def predict_log(self, X) -> np.ndarray:
        return boosted_predict(self.trees, self.base_score, self.params.learning_rate,
                               self._check(X))

    def predict(self, X) -> np.ndarray:
        return np.exp(self.predict_log(X))


def _stack(samples: Sequence[CensoredSample]):
    X = np.stack([np.asarray(s.features, dtype=np.float64) for s in samples])
    log_value = np.log([s.value for s in samples])
    censored = np.array([s.censored for s in samples])
    return X, log_value, censored


def fit_censored(
    uncensored: Sequence[CensoredSample],
    censored: Sequence[CensoredSample],
    params: AftParams,
    seed: int = 0,
) -> AftModel:
    samples = [replace(s, censored=False) for s in uncensored] + [
        replace(s, censored=True) for s in censored
    ]
    if not samples:
        raise ValueError("empty training set")
    X, log_value, cens = _stack(samples)
    if params.base_score is not None:
        base = params.base_score
    elif uncensored:
        base = float(np.mean(log_value[~cens]))
    else:
        base = float(np.mean(log_value[cens]))
    dist, scale = params.noise_distribution, params.distribution_scale
    trees = newton_boost(
        X,
        lambda pred: _grad_hess_vec(pred, log_value, cens, dist, scale),
        base,
        params.num_boost_round,
        params.learning_rate,
        params.max_depth,
        params.min_samples_leaf,
        params.min_child_weight,
    )
    return AftModel(base, trees, params, X.shape[1])


def training_nll(model: AftModel, samples: Sequence[CensoredSample]) -> float:
    X, log_value, cens = _stack(samples)
    g = model.predict_log(X)
    return float(
        _nll_vec(g, log_value, cens, model.params.noise_distribution,
                 model.params.distribution_scale).sum()
    )


def predict_final(model: AftModel, x) -> float:
    """Predicted final behavior in original units; strictly positive."""
    return float(model.predict(np.atleast_2d(x))[0])


def predict_quantile(model: AftModel, x, q: float) -> float:
    """q-th quantile of the modeled distribution of the final value.

    The fitted g(x) is a location parameter, not a central estimate: for the
    extreme distribution (S(z) = exp(-e^z)) the value exp(g) sits at the
    63.2nd percentile. The quantile is exp(g + scale * ln(-ln(1-q))) for the
    extreme distribution and exp(g + scale * Phi^-1(q)) for the normal.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    g = float(model.predict_log(np.atleast_2d(x))[0])
    scale = model.params.distribution_scale
    if model.params.noise_distribution == EXTREME:
        z_q = np.log(-np.log1p(-q))
    else:
        z_q = float(norm.ppf(q))
    return float(np.exp(g + scale * z_q))


def predict_median(model: AftModel, x) -> float:
    """Median of the modeled distribution of the final value."""
    return predict_quantile(model, x, 0.5)


def predict_mean(model: AftModel, X) -> np.ndarray:
    """Mean of the modeled distribution of the final value.

    exp(g) is a location parameter, not the mean: with Y = exp(g + scale*eps),
    E[Y] = exp(g) * E[exp(scale*eps)], which is Gamma(1 + scale) for the
    extreme distribution (eps = log of a unit exponential) and
    exp(scale^2 / 2) for the normal.
    """
    scale = model.params.distribution_scale
    if model.params.noise_distribution == EXTREME:
        factor = float(sp_gamma(1.0 + scale))
    else:
        factor = float(np.exp(0.5 * scale * scale))
    return model.predict(X) * factor


def select_aft_params(
    uncensored: Sequence[CensoredSample],
    censored: Sequence[CensoredSample],
    defaults: AftParams = AftParams(),
    scale_grid: Sequence[float] = SCALE_GRID,
    lr_grid: Sequence[float] = LEARNING_RATE_GRID,
    max_folds: int = 16,
) -> AftParams:
    """Pick (scale, learning_rate) by leave-one-out NLL on the uncensored set.

    With fewer than 4 uncensored samples there is nothing sensible to
    cross-validate, so the grid midpoints are used. Folds are capped at
    max_folds (evenly strided) to bound per-round overhead.
    """
    if len(uncensored) < 4:
        return replace(defaults, distribution_scale=0.3, learning_rate=0.25)
    n = len(uncensored)
    fold_idx = list(range(n))
    if n > max_folds:
        stride = n / max_folds
        fold_idx = sorted({int(i * stride) for i in range(max_folds)})
    best = None
    for scale in scale_grid:
        for lr in lr_grid:
            cand = replace(defaults, distribution_scale=scale, learning_rate=lr)
            total = 0.0
            for i in fold_idx:
                train = [s for j, s in enumerate(uncensored) if j != i]
                model = fit_censored(train, censored, cand)
                total += training_nll(model, [uncensored[i]])
            if best is None or total < best[0] - 1e-12:
                best = (total, cand)
    return best[1]
