"""Workload execution: a deterministic virtual-time trace replayer plus a
generic subprocess executor, both polled at a fixed interval and both
supporting early termination.

The trace replayer models a run as accruing latency and energy linearly at
the row's average power until the recorded final latency is reached.
"""

from __future__ import annotations

import csv
import os
import signal
import subprocess
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from tune.space import ConfigSpace, Configuration

DEFAULT_INTERVAL_S = 5.0


class ExecutionError(RuntimeError):
    pass


@dataclass(frozen=True)
class BehaviorReading:
    elapsed_latency: float
    elapsed_energy: float
    finished: bool
    final_latency: float | None = None
    final_energy: float | None = None


class WorkloadTrace:
    """Recorded (configuration, final latency, final energy) rows."""

    def __init__(self, space: ConfigSpace, configs: Sequence[Configuration],
                 latencies, energies):
        self.space = space
        self.configs = list(configs)
        self.latencies = np.asarray(latencies, dtype=np.float64)
        self.energies = np.asarray(energies, dtype=np.float64)
        if len(self.configs) != len(self.latencies) or len(self.configs) != len(self.energies):
            raise ValueError("configs, latencies and energies must align")
        if (self.latencies <= 0).any() or (self.energies <= 0).any():
            raise ValueError("latencies and energies must be positive")
        self._index = {}
        for i, c in enumerate(self.configs):
            if c.key() in self._index:
                raise ValueError(f"duplicate configuration in trace: {c.values}")
            self._index[c.key()] = i

    def __len__(self) -> int:
        return len(self.configs)

    @property
    def avg_power(self) -> np.ndarray:
        return self.energies / self.latencies

    def lookup(self, config: Configuration) -> int:
        try:
            return self._index[config.key()]
        except KeyError:
            raise ExecutionError(f"configuration not in trace: {config.values}") from None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.space.names + ["latency_s", "energy_j"])
            for c, lat, en in zip(self.configs, self.latencies, self.energies):
                w.writerow([_fmt(v) for v in c.values] + [repr(float(lat)), repr(float(en))])

    @classmethod
    def from_csv(cls, path, space: ConfigSpace) -> "WorkloadTrace":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0]
        if header != space.names + ["latency_s", "energy_j"]:
            raise ValueError(f"{path}: header does not match the config space")
        configs, lats, ens = [], [], []
        for row in rows[1:]:
            values = tuple(
                _parse(spec.kind, cell) for spec, cell in zip(space.params, row[: len(space)])
            )
            configs.append(Configuration(values))
            lats.append(float(row[-2]))
            ens.append(float(row[-1]))
        return cls(space, configs, lats, ens)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(kind: str, cell: str):
    if kind == "continuous":
        return float(cell)
    if kind == "integer":
        return int(cell)
    return cell


class RunHandle:
    """In-flight run; poll/terminate are only valid while it is open."""

    def __init__(self, run_id: int):
        self.run_id = run_id
        self.open = True
        self.finished = False
        self.consumed = 0.0
        self.last_wall = 0.0
        self.last_t = 0


class TraceExecutor:
    """Replays a trace in virtual time; linear latency/energy accrual."""

    def __init__(self, trace: WorkloadTrace, interval_s: float = DEFAULT_INTERVAL_S,
                 progress_curve: Callable[[int, float], float] | None = None):
        # progress_curve(row, elapsed_latency) -> elapsed_energy override
        self.trace = trace
        self.interval_s = interval_s
        self.progress_curve = progress_curve
        self._next_id = 0
        self._rows: dict[int, int] = {}

    @property
    def space(self) -> ConfigSpace:
        return self.trace.space

    def start(self, config: Configuration) -> RunHandle:
        row = self.trace.lookup(config)
        handle = RunHandle(self._next_id)
        self._next_id += 1
        self._rows[handle.run_id] = row
        return handle

    def poll(self, handle: RunHandle, t: int) -> BehaviorReading:
        if not handle.open:
            raise ExecutionError("poll on a closed run")
        if t <= handle.last_t:
            raise ExecutionError("polls must use increasing interval indices")
        handle.last_t = t
        row = self._rows[handle.run_id]
        final_lat = float(self.trace.latencies[row])
        final_en = float(self.trace.energies[row])
        wall = t * self.interval_s
        handle.last_wall = wall
        if wall < final_lat:
            handle.consumed = wall
            energy = (
                self.progress_curve(row, wall)
                if self.progress_curve is not None
                else final_en / final_lat * wall
            )
            return BehaviorReading(wall, energy, finished=False)
        handle.finished = True
        handle.open = False
        handle.consumed = final_lat
        return BehaviorReading(final_lat, final_en, finished=True,
                               final_latency=final_lat, final_energy=final_en)

    def terminate(self, handle: RunHandle) -> float:
        if handle.finished:
            raise ExecutionError("cannot terminate a finished run")
        if not handle.open:
            raise ExecutionError("run already terminated")
        handle.open = False
        handle.consumed = handle.last_wall
        return handle.consumed


class SubprocessExecutor:
    """Runs a workload command per configuration and polls a metrics file.

    The command is rendered by cmd_builder(config) and must append one CSV
    line "elapsed_s,elapsed_j" per interval to metrics_path. Termination
    kills the whole process group.
    """

    def __init__(self, cmd_builder: Callable[[Configuration], list[str]],
                 metrics_path: str, interval_s: float = DEFAULT_INTERVAL_S):
        self.cmd_builder = cmd_builder
        self.metrics_path = metrics_path
        self.interval_s = interval_s
        self._procs: dict[int, subprocess.Popen] = {}
        self._starts: dict[int, float] = {}
        self._next_id = 0

    def start(self, config: Configuration) -> RunHandle:
        if os.path.exists(self.metrics_path):
            os.unlink(self.metrics_path)
        proc = subprocess.Popen(self.cmd_builder(config), start_new_session=True)
        handle = RunHandle(self._next_id)
        self._next_id += 1
        self._procs[handle.run_id] = proc
        self._starts[handle.run_id] = time.monotonic()
        return handle

    def _read_metrics(self) -> tuple[float, float] | None:
        try:
            with open(self.metrics_path) as fh:
                lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        except FileNotFoundError:
            return None
        if not lines:
            return None
        elapsed_s, elapsed_j = lines[-1].split(",")
        return float(elapsed_s), float(elapsed_j)

    def poll(self, handle: RunHandle, t: int) -> BehaviorReading:
        if not handle.open:
            raise ExecutionError("poll on a closed run")
        if t <= handle.last_t:
            raise ExecutionError("polls must use increasing interval indices")
        proc = self._procs[handle.run_id]
        # wait out the remainder of the t-th wall-clock interval
        deadline = self._starts[handle.run_id] + t * self.interval_s
        delay = deadline - time.monotonic()
        if delay > 0 and proc.poll() is None:
            try:
                proc.wait(timeout=delay)
            except subprocess.TimeoutExpired:
                pass
        handle.last_t = t
        handle.last_wall = time.monotonic() - self._starts[handle.run_id]
        metrics = self._read_metrics()
        if proc.poll() is not None:
            if metrics is None:
                raise ExecutionError("workload exited without writing metrics")
            handle.finished = True
            handle.open = False
            handle.consumed = metrics[0]
            return BehaviorReading(metrics[0], metrics[1], finished=True,
                                   final_latency=metrics[0], final_energy=metrics[1])
        elapsed_s, elapsed_j = metrics if metrics is not None else (handle.last_wall, 0.0)
        handle.consumed = handle.last_wall
        return BehaviorReading(elapsed_s, elapsed_j, finished=False)

    def terminate(self, handle: RunHandle) -> float:
        if handle.finished:
            raise ExecutionError("cannot terminate a finished run")
        if not handle.open:
            raise ExecutionError("run already terminated")
        proc = self._procs[handle.run_id]
        try:
            os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
        except ProcessLookupError:
            pass
        proc.wait()
        handle.open = False
        handle.consumed = handle.last_wall
        return handle.consumed
