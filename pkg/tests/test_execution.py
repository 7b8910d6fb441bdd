import filecmp
import sys

import numpy as np
import pytest

from tune.execution import (
    ExecutionError,
    SubprocessExecutor,
    TraceExecutor,
    WorkloadTrace,
)
from tune.space import ConfigSpace, Configuration, ParamSpec


class TestWorkloadTrace:
    def test_misaligned_inputs_rejected(self, trace_factory):
        with pytest.raises(ValueError):
            space = ConfigSpace((ParamSpec("knob", "integer", lo=0, hi=9),))
            WorkloadTrace(space, [Configuration((0,))], [1.0, 2.0], [1.0, 2.0])

    def test_nonpositive_behavior_rejected(self, trace_factory):
        with pytest.raises(ValueError):
            trace_factory([10.0, 0.0])

    def test_duplicate_configuration_rejected(self):
        space = ConfigSpace((ParamSpec("knob", "integer", lo=0, hi=9),))
        configs = [Configuration((1,)), Configuration((1,))]
        with pytest.raises(ValueError):
            WorkloadTrace(space, configs, [1.0, 2.0], [1.0, 2.0])

    def test_avg_power(self, trace_factory):
        trace = trace_factory([10.0, 20.0], powers=[3.0, 7.0])
        np.testing.assert_allclose(trace.avg_power, [3.0, 7.0])

    def test_lookup_unknown_config_raises(self, trace_factory):
        trace = trace_factory([10.0])
        with pytest.raises(ExecutionError):
            trace.lookup(Configuration((5,)))

    def test_csv_roundtrip_bit_exact(self, small_space, tmp_path, rng):
        from tune.space import candidate_pool

        pool = candidate_pool(small_space, 20, rng)
        lat = rng.uniform(1.0, 100.0, size=20)
        en = rng.uniform(1.0, 1000.0, size=20)
        trace = WorkloadTrace(small_space, pool, lat, en)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        trace.to_csv(p1)
        back = WorkloadTrace.from_csv(p1, small_space)
        np.testing.assert_array_equal(back.latencies, trace.latencies)
        np.testing.assert_array_equal(back.energies, trace.energies)
        assert back.configs == trace.configs
        back.to_csv(p2)
        assert filecmp.cmp(p1, p2, shallow=False)

    def test_csv_header_mismatch_raises(self, small_space, trace_factory, tmp_path):
        trace = trace_factory([5.0])
        path = tmp_path / "t.csv"
        trace.to_csv(path)
        with pytest.raises(ValueError):
            WorkloadTrace.from_csv(path, small_space)


class TestTraceExecutor:
    def test_linear_accrual_until_finish(self, trace_factory):
        trace = trace_factory([12.0], powers=[2.0])
        ex = TraceExecutor(trace, interval_s=5.0)
        h = ex.start(trace.configs[0])
        r1 = ex.poll(h, 1)
        assert (r1.elapsed_latency, r1.elapsed_energy, r1.finished) == (5.0, 10.0, False)
        r2 = ex.poll(h, 2)
        assert (r2.elapsed_latency, r2.elapsed_energy, r2.finished) == (10.0, 20.0, False)
        r3 = ex.poll(h, 3)
        assert r3.finished
        assert r3.final_latency == 12.0 and r3.final_energy == 24.0
        assert h.consumed == 12.0  # finishing charges the true latency, not 15

    def test_terminate_charges_poll_time(self, trace_factory):
        trace = trace_factory([100.0])
        ex = TraceExecutor(trace, interval_s=5.0)
        h = ex.start(trace.configs[0])
        ex.poll(h, 1)
        ex.poll(h, 2)
        assert ex.terminate(h) == 10.0

    def test_terminate_finished_run_raises(self, trace_factory):
        trace = trace_factory([4.0])
        ex = TraceExecutor(trace)
        h = ex.start(trace.configs[0])
        ex.poll(h, 1)
        with pytest.raises(ExecutionError):
            ex.terminate(h)

    def test_double_terminate_raises(self, trace_factory):
        trace = trace_factory([100.0])
        ex = TraceExecutor(trace)
        h = ex.start(trace.configs[0])
        ex.poll(h, 1)
        ex.terminate(h)
        with pytest.raises(ExecutionError):
            ex.terminate(h)

    def test_poll_after_close_raises(self, trace_factory):
        trace = trace_factory([4.0])
        ex = TraceExecutor(trace)
        h = ex.start(trace.configs[0])
        ex.poll(h, 1)
        with pytest.raises(ExecutionError):
            ex.poll(h, 2)

    def test_non_increasing_poll_index_raises(self, trace_factory):
        trace = trace_factory([100.0])
        ex = TraceExecutor(trace)
        h = ex.start(trace.configs[0])
        ex.poll(h, 2)
        with pytest.raises(ExecutionError):
            ex.poll(h, 2)

    def test_progress_curve_override(self, trace_factory):
        trace = trace_factory([100.0])
        ex = TraceExecutor(trace, interval_s=5.0, progress_curve=lambda row, t: 7.0 * t)
        h = ex.start(trace.configs[0])
        assert ex.poll(h, 1).elapsed_energy == 35.0


class TestSubprocessExecutor:
    def _executor(self, tmp_path, total_s):
        metrics = str(tmp_path / "metrics.csv")
        code = (
            "import sys,time\n"
            f"total=float({total_s!r}); t=0.0\n"
            "while t < total:\n"
            "    time.sleep(0.05); t += 0.05\n"
            f"    open({metrics!r},'a').write(f'{{t}},{{t*2}}\\n')\n"
        )
        return SubprocessExecutor(
            lambda cfg: [sys.executable, "-c", code], metrics, interval_s=0.2
        )

    def test_run_to_completion(self, tmp_path, trace_factory):
        trace = trace_factory([1.0])
        ex = self._executor(tmp_path, 0.3)
        h = ex.start(trace.configs[0])
        t = 0
        reading = None
        while t < 50:
            t += 1
            reading = ex.poll(h, t)
            if reading.finished:
                break
        assert reading is not None and reading.finished
        assert reading.final_latency == pytest.approx(0.3, abs=0.1)

    def test_terminate_kills_process(self, tmp_path, trace_factory):
        trace = trace_factory([1.0])
        ex = self._executor(tmp_path, 30.0)
        h = ex.start(trace.configs[0])
        reading = ex.poll(h, 1)
        assert not reading.finished
        consumed = ex.terminate(h)
        assert 0.0 < consumed < 5.0
