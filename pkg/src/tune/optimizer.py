"""The search loop: Bayesian optimization with interval monitoring,
censored-regression prediction and predictive early termination.

One round = select a candidate, run it, and either let it finish (its true
behavior, or a finite penalty if it violates the constraint, joins the
training set) or terminate it early (it is dropped and only its consumed
time is charged against the budget).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from tune import baselines
from tune.acquisition import AcquisitionContext, select_next
from tune.baselines import Strategy
from tune.censored import AftParams, CensoredSample, fit_censored, predict_quantile, select_aft_params
from tune.execution import BehaviorReading
from tune.forest import ForestParams, fit_forest
from tune.space import ConfigSpace, Configuration, encode_pool

LATENCY = "latency"
ENERGY = "energy"
POWER = "power"

PENALTY_FACTOR = 10.0
# below this many finished samples, only the measured elapsed-value floor can
# terminate a run: with two or three training points the regression places
# whole half-spaces of the pool at the level of a single bad sample, and the
# resulting first-poll kills hit genuine improvements
MIN_FINISHED_FOR_TERMINATION = 4
# Quantile of the predictive distribution compared against the best-so-far:
# terminate only when the model is confident the run will end above gamma.
# With a handful of training samples a tree's point prediction is dominated by
# whichever finished sample the candidate happens to share a leaf with, so a
# central estimate would also kill runs the model merely knows nothing about.
TERMINATION_QUANTILE = 0.1


@dataclass(frozen=True)
class Problem:
    objective: str  # latency | energy
    constraint_metric: str  # power | latency
    constraint_value: float
    budget_s: float

    def __post_init__(self):
        pairing = (self.objective, self.constraint_metric)
        if pairing not in ((LATENCY, POWER), (ENERGY, LATENCY)):
            raise ValueError(f"unsupported objective/constraint pairing {pairing}")
        if not self.constraint_value > 0 or not self.budget_s > 0:
            raise ValueError("constraint_value and budget_s must be > 0")


@dataclass
class RoundRecord:
    round: int
    candidate: int
    outcome: str  # finished-feasible | finished-infeasible | terminated
    consumed_s: float
    predictions: list[float]
    gamma: float | None
    budget_remaining: float


@dataclass
class SearchState:
    budget_remaining: float
    train_indices: list[int] = field(default_factory=list)
    Y_train: list[float] = field(default_factory=list)
    true_objectives: list[float] = field(default_factory=list)  # unpenalized
    feasible: list[bool] = field(default_factory=list)
    history: list[RoundRecord] = field(default_factory=list)
    max_objective_seen: float = 0.0
    overhead_s: float = 0.0

    @property
    def gamma(self) -> float | None:
        vals = [y for y, f in zip(self.Y_train, self.feasible) if f]
        return min(vals) if vals else None


@dataclass
class SearchResult:
    best_config: Configuration | None
    best_value: float | None
    rounds: int
    samples_completed: int
    samples_terminated: int
    history: list[RoundRecord]
    pool_exhausted: bool
    overhead_s: float


def should_terminate(prediction: float, gamma: float) -> bool:
    """Boundary inclusive: a prediction equal to the best-so-far terminates."""
    return prediction >= gamma


def update_training(state: SearchState, candidate: int, objective_value: float,
                    constraint_value: float, constraint_limit: float,
                    penalty_factor: float = PENALTY_FACTOR) -> bool:
    """Append a finished sample; infeasible samples get a finite penalty value.

    The penalty (penalty_factor x largest objective seen so far, fixed at
    insertion) keeps the constraint violation visible to the surrogate
    without poisoning tree splits the way an infinity would.
    """
    feasible = constraint_value <= constraint_limit
    state.max_objective_seen = max(state.max_objective_seen, objective_value)
    y = objective_value if feasible else penalty_factor * state.max_objective_seen
    state.train_indices.append(candidate)
    state.Y_train.append(y)
    state.true_objectives.append(objective_value)
    state.feasible.append(feasible)
    return feasible


def _objective_of(problem: Problem, reading: BehaviorReading) -> float:
    return reading.final_latency if problem.objective == LATENCY else reading.final_energy


def _constraint_of(problem: Problem, reading: BehaviorReading) -> float:
    if problem.constraint_metric == POWER:
        return reading.final_energy / reading.final_latency
    return reading.final_latency


def _elapsed_of(problem: Problem, reading: BehaviorReading) -> float:
    return (
        reading.elapsed_latency if problem.objective == LATENCY else reading.elapsed_energy
    )


def run_search(
    problem: Problem,
    space: ConfigSpace,
    pool: Sequence[Configuration],
    executor,
    strategy: Strategy,
    seed: int,
    forest_params: ForestParams | None = None,
    aft_defaults: AftParams = AftParams(),
    aft_base_margin: float | None = None,
    min_finished: int = MIN_FINISHED_FOR_TERMINATION,
    termination_quantile: float = TERMINATION_QUANTILE,
    penalty_factor: float = PENALTY_FACTOR,
    charge_overhead: bool = False,
    initial_index: int | None = None,
) -> SearchResult:
    if not pool:
        raise ValueError("candidate pool is empty")
    rng = np.random.default_rng(seed)
    X_pool = encode_pool(space, pool)
    fp = forest_params if forest_params is not None else ForestParams()
    state = SearchState(budget_remaining=problem.budget_s)
    sampled: set[int] = set()
    terminated_count = 0
    cv_watermark = 0  # uncensored count at the last hyperparameter selection
    cv_choice: AftParams | None = None

    def spend_overhead(seconds: float) -> None:
        state.overhead_s += seconds
        if charge_overhead:
            state.budget_remaining -= seconds

    def make_check(round_no: int, cand: int, gamma: float | None):
        """Return check(reading, t) -> (terminate?, prediction or None)."""
        variant = strategy.variant
        if variant in (baselines.RS, baselines.BO):
            return None
        if variant == baselines.BO_ST:
            if strategy.static_threshold is None:
                return None
            thr = strategy.static_threshold
            return lambda reading, t: (
                baselines.bo_st_check(_elapsed_of(problem, reading), thr),
                None,
            )
        if gamma is None:
            # no best-so-far yet: never terminate
            return None
        if variant == baselines.BO_TC:
            return lambda reading, t: (
                baselines.bo_tc_check(_elapsed_of(problem, reading), gamma),
                None,
            )
        if variant == baselines.BO_GB:
            cache: dict[str, float] = {}

            def gb_check(reading, t):
                if "pred" not in cache:
                    t0 = time.perf_counter()
                    cache["pred"] = baselines.bo_gb_predict(
                        X_pool[state.train_indices], state.true_objectives, X_pool[cand]
                    )
                    spend_overhead(time.perf_counter() - t0)
                pred = cache["pred"]
                return should_terminate(pred, gamma), pred

            return gb_check

        # with very few finished samples the regression prediction is whatever
        # sample the candidate happens to share a leaf with, so the model is
        # not consulted yet; the elapsed-value floor (the final value is at
        # least the elapsed value) needs no model and applies from the start
        if len(state.true_objectives) < min_finished:
            return lambda reading, t: (
                should_terminate(_elapsed_of(problem, reading), gamma),
                _elapsed_of(problem, reading),
            )

        def cello_check(reading, t):
            nonlocal cv_watermark, cv_choice
            tau = _elapsed_of(problem, reading)
            # the regressor predicts actual behavior, so it trains on true
            # observed values; the constraint penalties only steer the surrogate
            uncensored = [
                CensoredSample(X_pool[i], y)
                for i, y in zip(state.train_indices, state.true_objectives)
            ]
            running = CensoredSample(X_pool[cand], tau, censored=True)
            # aft_base_margin anchors the boosting base below the best-so-far
            # instead of at the mean of the finished log values
            base = (
                float(np.log(gamma)) - aft_base_margin
                if aft_base_margin is not None
                else aft_defaults.base_score
            )
            anchored = replace(aft_defaults, base_score=base)
            t0 = time.perf_counter()
            if cv_choice is None or len(uncensored) >= max(4, int(1.3 * cv_watermark)):
                cv_choice = select_aft_params(uncensored, [running], defaults=anchored)
                cv_watermark = len(uncensored)
            model = fit_censored(uncensored, [running], replace(cv_choice, base_score=base))
            # the final value is at least the elapsed value, so the elapsed
            # time floors the prediction: a run that has measurably passed
            # gamma is always terminated, but never before it actually does
            pred = max(predict_quantile(model, X_pool[cand], termination_quantile), tau)
            spend_overhead(time.perf_counter() - t0)
            return should_terminate(pred, gamma), pred

        return cello_check

    def run_candidate(cand: int, check):
        executor_handle = executor.start(pool[cand])
        predictions: list[float] = []
        t = 0
        while True:
            t += 1
            reading = executor.poll(executor_handle, t)
            if reading.finished:
                return "finished", reading, executor_handle.consumed, predictions
            if check is not None:
                terminate, pred = check(reading, t)
                if pred is not None:
                    predictions.append(pred)
                if terminate:
                    consumed = executor.terminate(executor_handle)
                    return "terminated", reading, consumed, predictions

    def record(round_no, cand, outcome, consumed, predictions, gamma):
        state.history.append(
            RoundRecord(round_no, cand, outcome, consumed, predictions, gamma,
                        state.budget_remaining)
        )

    # initial sample always runs to completion: there is no best-so-far yet
    cand0 = int(initial_index) if initial_index is not None else int(rng.integers(len(pool)))
    sampled.add(cand0)
    _, reading, consumed, _ = run_candidate(cand0, None)
    state.budget_remaining -= consumed
    obj0 = _objective_of(problem, reading)
    feasible = update_training(state, cand0, obj0, _constraint_of(problem, reading),
                               problem.constraint_value, penalty_factor)
    if strategy.variant == baselines.BO_ST and strategy.static_threshold is None:
        strategy.static_threshold = obj0
    record(0, cand0, "finished-feasible" if feasible else "finished-infeasible",
           consumed, [], None)

    round_no = 1
    while state.budget_remaining > 0 and len(sampled) < len(pool):
        if strategy.variant == baselines.RS:
            cand = baselines.rs_step(sampled, len(pool), rng)
        else:
            t0 = time.perf_counter()
            model = fit_forest(
                X_pool[state.train_indices], state.Y_train,
                ForestParams(fp.n_trees, fp.max_depth, fp.min_samples_leaf,
                             fp.bootstrap_fraction, seed=fp.seed + round_no),
            )
            gamma = state.gamma
            m_best = gamma if gamma is not None else min(state.Y_train)
            ctx = AcquisitionContext(m_best, X_pool, set(sampled))
            cand = select_next(model, ctx)
            spend_overhead(time.perf_counter() - t0)
        sampled.add(cand)
        gamma = state.gamma
        outcome, reading, consumed, predictions = run_candidate(
            cand, make_check(round_no, cand, gamma)
        )
        state.budget_remaining -= consumed
        if outcome == "finished":
            feasible = update_training(
                state, cand, _objective_of(problem, reading),
                _constraint_of(problem, reading), problem.constraint_value, penalty_factor,
            )
            record(round_no, cand, "finished-feasible" if feasible else "finished-infeasible",
                   consumed, predictions, gamma)
        else:
            terminated_count += 1
            record(round_no, cand, "terminated", consumed, predictions, gamma)
        round_no += 1

    best_config = None
    best_value = None
    feas_vals = [(y, i) for y, f, i in zip(state.Y_train, state.feasible, state.train_indices) if f]
    if feas_vals:
        best_value, best_idx = min(feas_vals)
        best_config = pool[best_idx]
    return SearchResult(
        best_config=best_config,
        best_value=best_value,
        rounds=len(state.history),
        samples_completed=len(state.Y_train),
        samples_terminated=terminated_count,
        history=state.history,
        pool_exhausted=len(sampled) >= len(pool) and state.budget_remaining > 0,
        overhead_s=state.overhead_s,
    )
