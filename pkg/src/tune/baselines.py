"""Reference search strategies sharing the optimizer's loop skeleton.

Variants: rs (random sampling, no model), bo (plain Bayesian optimization),
bo-st (measured termination at a static threshold taken from the initial
sample), bo-tc (measured termination at the best-so-far), bo-gb (predictive
termination with a standard squared-error regressor), cello (predictive
termination with censored regression).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tune.boosting import GBTRegressor

RS = "rs"
BO = "bo"
BO_ST = "bo-st"
BO_TC = "bo-tc"
BO_GB = "bo-gb"
CELLO = "cello"
VARIANTS = (RS, BO, BO_ST, BO_TC, BO_GB, CELLO)

# variants that abort runs based on the measured elapsed metric
MEASURED = (BO_ST, BO_TC)
# variants that abort runs based on a predicted final metric
PREDICTIVE = (BO_GB, CELLO)


@dataclass
class Strategy:
    variant: str
    static_threshold: float | None = None  # bo-st only, set from the initial sample

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown strategy {self.variant!r}")


def rs_step(sampled: set[int], n_pool: int, rng: np.random.Generator) -> int:
    """Uniform choice among unsampled candidates."""
    unsampled = [i for i in range(n_pool) if i not in sampled]
    if not unsampled:
        raise RuntimeError("candidate pool exhausted")
    return int(rng.choice(unsampled))


def bo_st_check(elapsed_value: float, static_threshold: float) -> bool:
    """Terminate once the measured elapsed behavior reaches the threshold."""
    return elapsed_value >= static_threshold


def bo_tc_check(elapsed_value: float, gamma: float) -> bool:
    """Terminate once the measured elapsed behavior reaches the best-so-far."""
    return elapsed_value >= gamma


def bo_gb_predict(X_finished, y_finished, x, num_rounds=20, learning_rate=0.25,
                  max_depth=6) -> float:
    """Standard squared-error GBT prediction from finished samples only."""
    model = GBTRegressor(num_rounds=num_rounds, learning_rate=learning_rate,
                         max_depth=max_depth)
    model.fit(X_finished, y_finished)
    return float(model.predict(np.atleast_2d(x))[0])
