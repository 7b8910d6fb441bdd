import numpy as np
import pytest

from tune.execution import WorkloadTrace
from tune.space import ConfigSpace, Configuration, ParamSpec


@pytest.fixture
def small_space() -> ConfigSpace:
    return ConfigSpace(
        (
            ParamSpec("freq", "continuous", lo=1.0, hi=3.0, units="GHz"),
            ParamSpec("threads", "integer", lo=1, hi=8),
            ParamSpec("io", "categorical", values=("sync", "async", "direct")),
        )
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


def make_trace(latencies, powers=None, space=None):
    """Trace over an integer knob, one row per latency, avg power as given."""
    n = len(latencies)
    space = space or ConfigSpace((ParamSpec("knob", "integer", lo=0, hi=max(9, n - 1)),))
    configs = [Configuration((i,)) for i in range(n)]
    latencies = np.asarray(latencies, dtype=np.float64)
    powers = np.asarray(powers if powers is not None else np.ones(n), dtype=np.float64)
    return WorkloadTrace(space, configs, latencies, powers * latencies)


@pytest.fixture
def trace_factory():
    return make_trace
