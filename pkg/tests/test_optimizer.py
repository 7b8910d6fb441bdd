import dataclasses

import numpy as np
import pytest

from tune.baselines import Strategy
from tune.execution import TraceExecutor
from tune.optimizer import (
    Problem,
    SearchState,
    run_search,
    should_terminate,
    update_training,
)


def search(trace, method="bo", budget=1000.0, seed=0, constraint=1e9, **kw):
    problem = Problem("latency", "power", constraint, budget)
    return run_search(problem, trace.space, trace.configs, TraceExecutor(trace),
                      Strategy(method), seed, **kw)


class TestProblem:
    def test_valid_pairings(self):
        Problem("latency", "power", 1.0, 1.0)
        Problem("energy", "latency", 1.0, 1.0)

    def test_invalid_pairing_rejected(self):
        with pytest.raises(ValueError):
            Problem("latency", "latency", 1.0, 1.0)

    def test_nonpositive_budget_rejected(self):
        with pytest.raises(ValueError):
            Problem("latency", "power", 1.0, 0.0)


class TestShouldTerminate:
    def test_above(self):
        assert should_terminate(50.0, 40.0)

    def test_below(self):
        assert not should_terminate(39.9, 40.0)

    def test_boundary_inclusive(self):
        assert should_terminate(40.0, 40.0)


class TestUpdateTraining:
    def test_feasible_appends_true_value(self):
        state = SearchState(budget_remaining=100.0)
        assert update_training(state, 3, 42.0, 10.0, 20.0)
        assert state.Y_train == [42.0] and state.gamma == 42.0

    def test_infeasible_appends_penalty(self):
        state = SearchState(budget_remaining=100.0)
        update_training(state, 0, 50.0, 10.0, 20.0)
        assert not update_training(state, 1, 30.0, 25.0, 20.0)
        assert state.Y_train[1] == pytest.approx(10.0 * 50.0)
        assert state.gamma == 50.0  # penalty excluded from gamma

    def test_penalty_fixed_at_insertion(self):
        state = SearchState(budget_remaining=100.0)
        update_training(state, 0, 10.0, 25.0, 20.0)  # infeasible, penalty 100
        update_training(state, 1, 500.0, 1.0, 20.0)
        assert state.Y_train[0] == pytest.approx(100.0)  # not revised retroactively


class TestLoop:
    def test_budget_smaller_than_first_sample(self, trace_factory):
        trace = trace_factory([50.0, 60.0, 70.0])
        result = search(trace, budget=10.0, initial_index=0)
        assert result.samples_completed == 1
        assert result.rounds == 1

    def test_pool_of_one(self, trace_factory):
        trace = trace_factory([30.0])
        result = search(trace, budget=100.0)
        assert result.best_config == trace.configs[0]
        assert result.best_value == 30.0
        assert result.pool_exhausted

    def test_empty_pool_rejected(self, trace_factory):
        trace = trace_factory([30.0])
        problem = Problem("latency", "power", 1e9, 100.0)
        with pytest.raises(ValueError):
            run_search(problem, trace.space, [], TraceExecutor(trace), Strategy("bo"), 0)

    def test_gamma_monotone_non_increasing(self, trace_factory, rng):
        trace = trace_factory(list(rng.uniform(5.0, 50.0, size=30)))
        result = search(trace, "bo", budget=400.0)
        gammas = [h.gamma for h in result.history if h.gamma is not None]
        assert all(b <= a for a, b in zip(gammas, gammas[1:]))

    def test_best_value_is_min_feasible(self, trace_factory, rng):
        lat = list(rng.uniform(5.0, 50.0, size=30))
        trace = trace_factory(lat, powers=list(rng.uniform(1.0, 3.0, size=30)))
        result = search(trace, "bo", budget=500.0, constraint=2.0)
        feas = [l for l, p in zip(trace.latencies, trace.avg_power) if p <= 2.0]
        sampled_best = min(
            trace.latencies[h.candidate]
            for h in result.history
            if h.outcome == "finished-feasible"
        )
        assert result.best_value == sampled_best
        assert result.best_value >= min(feas)

    def test_no_feasible_sample_gives_absent_best(self, trace_factory):
        trace = trace_factory([10.0, 20.0], powers=[5.0, 5.0])
        result = search(trace, budget=100.0, constraint=1.0)
        assert result.best_config is None and result.best_value is None

    def test_determinism(self, trace_factory, rng):
        lat = list(rng.uniform(5.0, 80.0, size=40))
        trace = trace_factory(lat)
        a = search(trace, "cello", budget=600.0, seed=5)
        b = search(trace, "cello", budget=600.0, seed=5)
        assert dataclasses.asdict(a)["history"] == dataclasses.asdict(b)["history"]
        assert (a.best_value, a.rounds, a.overhead_s >= 0) == (b.best_value, b.rounds, True)

    def test_seed_changes_search(self, trace_factory, rng):
        lat = list(rng.uniform(5.0, 80.0, size=40))
        trace = trace_factory(lat)
        a = search(trace, "rs", budget=300.0, seed=1)
        b = search(trace, "rs", budget=300.0, seed=2)
        assert [h.candidate for h in a.history] != [h.candidate for h in b.history]

    def test_terminated_runs_stay_out_of_training(self, trace_factory):
        # one fast run, then a wall of slow runs that bo-tc must cut at gamma
        trace = trace_factory([10.0] + [200.0] * 15)
        result = search(trace, "bo-tc", budget=300.0, initial_index=0)
        assert result.samples_terminated > 0
        assert result.samples_completed == sum(
            1 for h in result.history if h.outcome.startswith("finished")
        )

    def test_budget_overshoot_at_most_one_run(self, trace_factory, rng):
        lat = list(rng.uniform(10.0, 90.0, size=25))
        trace = trace_factory(lat)
        for method in ("rs", "bo", "bo-tc", "cello"):
            result = search(trace, method, budget=333.0)
            consumed = sum(h.consumed_s for h in result.history)
            assert consumed <= 333.0 + max(trace.latencies)
            assert consumed > 333.0 - max(trace.latencies) or result.pool_exhausted

    def test_pool_exhaustion_flag(self, trace_factory):
        trace = trace_factory([5.0, 6.0, 7.0])
        result = search(trace, budget=1e6)
        assert result.pool_exhausted
        assert result.samples_completed == 3

    def test_overhead_not_charged_in_virtual_mode(self, trace_factory, rng):
        lat = list(rng.uniform(5.0, 30.0, size=20))
        trace = trace_factory(lat)
        result = search(trace, "bo", budget=200.0)
        assert result.overhead_s > 0.0
        consumed = sum(h.consumed_s for h in result.history)
        # all budget is spent on runs, none on model fitting
        assert consumed >= 200.0 or result.pool_exhausted

    def test_first_sample_runs_to_completion(self, trace_factory):
        trace = trace_factory([500.0, 10.0])
        result = search(trace, "cello", budget=600.0, initial_index=0)
        assert result.history[0].outcome.startswith("finished")
        assert result.history[0].consumed_s == 500.0


class TestCelloMechanics:
    def _cluster_trace(self, trace_factory):
        # starting on the slow sample at index 1 sets gamma to the slow level,
        # so the slow cluster has a completed example; the fast sample at
        # index 0 is taken next (acquisition tie-break) and drops gamma
        return trace_factory([20.0] + [100.0] * 11)

    def test_doomed_runs_die_at_first_interval(self, trace_factory):
        trace = self._cluster_trace(trace_factory)
        result = search(trace, "cello", budget=500.0, initial_index=1, min_finished=2)
        killed = [h for h in result.history if h.outcome == "terminated"]
        assert killed, "expected terminations against the slow cluster"
        assert any(h.consumed_s == 5.0 for h in killed)
        for h in killed:
            assert h.predictions and h.predictions[-1] >= h.gamma

    def test_only_measured_cutoff_before_min_finished(self, trace_factory):
        # below the warmup gate the model is not consulted: runs are cut only
        # once their elapsed value itself reaches gamma
        trace = self._cluster_trace(trace_factory)
        result = search(trace, "cello", budget=500.0, initial_index=1, min_finished=6)
        completed = 0
        for h in result.history:
            if h.outcome == "terminated":
                if completed < 6:
                    assert h.consumed_s >= h.gamma
            else:
                completed += 1

    def test_no_termination_without_gamma(self, trace_factory):
        # every sample infeasible: gamma never defined, nothing terminated
        trace = trace_factory([30.0] * 6, powers=[9.0] * 6)
        result = search(trace, "cello", budget=200.0, constraint=1.0)
        assert result.samples_terminated == 0

    def test_charge_overhead_mode_reduces_rounds(self, trace_factory, rng):
        lat = list(rng.uniform(5.0, 30.0, size=25))
        trace = trace_factory(lat)
        free = search(trace, "bo", budget=150.0, seed=3)
        slow_fit = dataclasses.replace
        charged = search(trace, "bo", budget=150.0, seed=3, charge_overhead=True)
        consumed = sum(h.consumed_s for h in charged.history)
        assert consumed <= 150.0 + max(trace.latencies)
        assert charged.rounds <= free.rounds


class TestBaselineMechanics:
    def test_rs_never_terminates(self, trace_factory, rng):
        trace = trace_factory(list(rng.uniform(5.0, 50.0, size=20)))
        result = search(trace, "rs", budget=300.0)
        assert result.samples_terminated == 0

    def test_bo_never_terminates(self, trace_factory, rng):
        trace = trace_factory(list(rng.uniform(5.0, 50.0, size=20)))
        result = search(trace, "bo", budget=300.0)
        assert result.samples_terminated == 0

    def test_bo_st_threshold_from_initial_sample(self, trace_factory):
        trace = trace_factory([40.0, 100.0, 100.0, 100.0])
        result = search(trace, "bo-st", budget=300.0, initial_index=0)
        for h in result.history[1:]:
            if h.outcome == "terminated":
                assert h.consumed_s == 40.0  # cut at the 40 s threshold
        assert result.samples_terminated > 0

    def test_bo_tc_consumes_at_least_gamma(self, trace_factory):
        trace = trace_factory([20.0, 21.0] + [100.0] * 8)
        result = search(trace, "bo-tc", budget=300.0, initial_index=0)
        killed = [h for h in result.history if h.outcome == "terminated"]
        assert killed
        for h in killed:
            assert h.consumed_s >= h.gamma

    def test_bo_gb_records_predictions(self, trace_factory):
        trace = trace_factory([20.0, 21.0] + [100.0] * 8)
        result = search(trace, "bo-gb", budget=300.0, initial_index=0)
        killed = [h for h in result.history if h.outcome == "terminated"]
        assert killed
        assert all(h.predictions for h in killed)
