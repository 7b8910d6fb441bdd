"""Expected improvement over a finite candidate pool (minimization).

EI(x) = (m - mu) * Phi(Z) + sigma * phi(Z),  Z = (m - mu) / sigma

where m is the best objective observed so far; EI is defined as 0 where
sigma == 0. The next point is the unsampled candidate with the highest EI,
ties broken by lowest candidate index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from tune.forest import ForestModel

_SQRT_2PI = np.sqrt(2.0 * np.pi)


class PoolExhausted(RuntimeError):
    """No unsampled candidates remain."""


def expected_improvement(mu, sigma, m_best):
    """Vectorized EI; total (no domain errors), exactly 0 at sigma == 0."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    impr = m_best - mu
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, impr / np.where(sigma > 0, sigma, 1.0), 0.0)
    phi = np.exp(-0.5 * z * z) / _SQRT_2PI
    ei = np.where(sigma > 0, impr * ndtr(z) + sigma * phi, 0.0)
    out = np.maximum(ei, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass
class AcquisitionContext:
    m_best: float
    pool_features: np.ndarray  # (n_candidates, p) encoded pool
    sampled: set[int] = field(default_factory=set)

    def unsampled_indices(self) -> np.ndarray:
        return np.array(
            [i for i in range(self.pool_features.shape[0]) if i not in self.sampled],
            dtype=np.int64,
        )


def select_next(model: ForestModel, ctx: AcquisitionContext) -> int:
    idx = ctx.unsampled_indices()
    if idx.size == 0:
        raise PoolExhausted("all candidates have been sampled")
    mu, sigma = model.predict_mean_std(ctx.pool_features[idx])
    ei = expected_improvement(mu, sigma, ctx.m_best)
    # idx is ascending, argmax takes the first max: lowest-index tie-break
    return int(idx[int(np.argmax(ei))])
