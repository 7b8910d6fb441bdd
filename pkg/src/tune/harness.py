"""Experiment driver: constraint percentiles, brute-force oracle, relative
error, synthetic trace generation, and method x constraint x seed sweeps
persisted as CSV.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from tune import baselines
from tune.baselines import Strategy
from tune.execution import DEFAULT_INTERVAL_S, TraceExecutor, WorkloadTrace
from tune.optimizer import ENERGY, LATENCY, POWER, Problem, run_search
from tune.space import ConfigSpace, Configuration, candidate_pool, encode_pool, load_space

PROBLEMS = {
    "lup": (LATENCY, POWER),  # minimize latency under a power cap
    "eul": (ENERGY, LATENCY),  # minimize energy under a latency cap
}

RESULT_FIELDS = [
    "workload", "method", "problem", "percentile", "budget", "seed",
    "best_value", "re", "samples_completed", "samples_terminated", "overhead_s",
]


def relative_error(y_pred: float, y_opt: float) -> float:
    if y_opt == 0:
        raise ValueError("optimal value is zero; relative error undefined")
    return abs(y_pred - y_opt) / abs(y_opt)


def _metric_values(trace: WorkloadTrace, metric: str) -> np.ndarray:
    if metric == POWER:
        return trace.avg_power
    if metric == LATENCY:
        return trace.latencies
    if metric == ENERGY:
        return trace.energies
    raise ValueError(f"unknown metric {metric!r}")


def constraint_from_percentile(trace: WorkloadTrace, metric: str, pct: float) -> float:
    """Empirical percentile with linear interpolation between order statistics."""
    if not 0 < pct < 100:
        raise ValueError("percentile must be in (0, 100)")
    return float(np.percentile(_metric_values(trace, metric), pct))


def oracle_optimum(trace: WorkloadTrace, problem_key: str, constraint: float):
    """Brute-force best feasible row; (None, None) when nothing is feasible."""
    objective, constraint_metric = PROBLEMS[problem_key]
    obj = _metric_values(trace, objective)
    con = _metric_values(trace, constraint_metric)
    feasible = np.nonzero(con <= constraint)[0]
    if feasible.size == 0:
        return None, None
    best = feasible[np.argmin(obj[feasible])]
    return float(obj[best]), trace.configs[best]


# ---------------------------------------------------------------------------
# Synthetic traces. Log-space surfaces with a few dominant parameters
# (geometrically decaying quadratic effects), one interaction between the two
# strongest parameters, and a sigmoid cliff on one parameter of the latency
# surface. The cliff creates a cluster of slow configurations well separated
# from the good region, which is the regime where early termination pays off.
# ---------------------------------------------------------------------------


def generate_trace(
    space: ConfigSpace,
    rows: int,
    seed: int,
    median_latency_s: float = 60.0,
    median_power_w: float = 80.0,
    effect_scale: float = 0.7,
    cliff_height: float = 1.2,
    noise: float = 0.06,
) -> WorkloadTrace:
    rng = np.random.default_rng(seed)
    pool = candidate_pool(space, rows, rng)
    X = encode_pool(space, pool)
    lo = X.min(axis=0)
    span = np.where(X.max(axis=0) > lo, X.max(axis=0) - lo, 1.0)
    U = (X - lo) / span  # per-parameter position in [0, 1]
    p = U.shape[1]

    def surface(local_rng, with_cliff: bool) -> np.ndarray:
        # geometric amplitude decay: a few parameters dominate the surface
        amp = effect_scale * (0.45 ** np.arange(p)) * local_rng.choice([-1, 1], size=p)
        amp = amp[local_rng.permutation(p)]
        center = local_rng.uniform(0.0, 1.0, size=p)
        total = np.zeros(rows)
        for j in range(p):
            total += amp[j] * ((U[:, j] - center[j]) ** 2 - 1.0 / 6.0)
        a, b = np.argsort(-np.abs(amp))[:2]
        total += (effect_scale / 3) * local_rng.choice([-1, 1]) * (
            (U[:, a] - 0.5) * (U[:, b] - 0.5)
        )
        if with_cliff:
            feat = int(local_rng.integers(p))
            thr = float(local_rng.uniform(0.3, 0.5))
            sign = float(local_rng.choice([-1, 1]))
            total += cliff_height / (1.0 + np.exp(-sign * (U[:, feat] - thr) / 0.04))
        total += local_rng.normal(0.0, noise, size=rows)
        return total

    log_latency = np.log(median_latency_s) + surface(
        np.random.default_rng([seed, 1]), with_cliff=True
    )
    log_power = np.log(median_power_w) + 0.5 * surface(
        np.random.default_rng([seed, 2]), with_cliff=False
    )
    latency = np.exp(log_latency)
    energy = np.exp(log_power) * latency
    return WorkloadTrace(space, pool, latency, energy)


# ---------------------------------------------------------------------------
# Sweeps.
# ---------------------------------------------------------------------------


@dataclass
class ExperimentPlan:
    traces: list[str]  # paths to trace CSVs
    space: str  # path to the space definition shared by the traces
    problems: list[str] = field(default_factory=lambda: ["lup"])
    percentiles: list[float] = field(default_factory=lambda: [30, 50, 70])
    budgets: list[float] = field(default_factory=list)  # empty: k x median latency
    methods: list[str] = field(default_factory=lambda: list(baselines.VARIANTS))
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    interval_s: float = DEFAULT_INTERVAL_S
    base_seed: int = 0
    budget_factors: tuple = (5, 10, 20, 40)

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("need at least one seed")
        for pct in self.percentiles:
            if not 0 < pct < 100:
                raise ValueError(f"percentile {pct} outside (0, 100)")


def load_plan(path) -> ExperimentPlan:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return ExperimentPlan(**doc)


def cell_seed(base_seed: int, trace: str, method: str, pct: float, budget: float,
              seed: int) -> int:
    """Stable per-cell seed so constraint cells are independent."""
    key = f"{base_seed}|{Path(trace).name}|{method}|{pct}|{budget}|{seed}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


def run_cell(trace: WorkloadTrace, problem_key: str, method: str, pct: float,
             budget: float, seed: int, interval_s: float = DEFAULT_INTERVAL_S,
             **search_kwargs) -> dict:
    objective, constraint_metric = PROBLEMS[problem_key]
    constraint = constraint_from_percentile(trace, constraint_metric, pct)
    problem = Problem(objective, constraint_metric, constraint, budget)
    executor = TraceExecutor(trace, interval_s)
    result = run_search(problem, trace.space, trace.configs, executor,
                        Strategy(method), seed, **search_kwargs)
    y_opt, _ = oracle_optimum(trace, problem_key, constraint)
    re = (
        relative_error(result.best_value, y_opt)
        if result.best_value is not None and y_opt is not None
        else None
    )
    return {
        "method": method,
        "problem": problem_key,
        "percentile": pct,
        "budget": budget,
        "seed": seed,
        "best_value": result.best_value,
        "re": re,
        "samples_completed": result.samples_completed,
        "samples_terminated": result.samples_terminated,
        "overhead_s": result.overhead_s,
        "result": result,
    }


def default_budgets(trace: WorkloadTrace, factors: Sequence[float]) -> list[float]:
    med = float(np.median(trace.latencies))
    return [k * med for k in factors]


def run_plan(plan: ExperimentPlan, out_path, **search_kwargs) -> list[dict]:
    space = load_space(plan.space)
    rows: list[dict] = []
    for trace_path in plan.traces:
        if not Path(trace_path).exists():
            raise FileNotFoundError(f"trace file not found: {trace_path}")
        trace = WorkloadTrace.from_csv(trace_path, space)
        budgets = plan.budgets or default_budgets(trace, plan.budget_factors)
        workload = Path(trace_path).stem
        for problem_key in plan.problems:
            for method in plan.methods:
                for pct in plan.percentiles:
                    for budget in budgets:
                        for seed in plan.seeds:
                            cs = cell_seed(plan.base_seed, trace_path, method, pct,
                                           budget, seed)
                            cell = run_cell(trace, problem_key, method, pct, budget, cs,
                                            plan.interval_s, **search_kwargs)
                            cell["workload"] = workload
                            cell["seed"] = seed
                            rows.append(cell)
    rows.sort(key=lambda r: (r["workload"], r["problem"], r["method"], r["percentile"],
                             r["budget"], r["seed"]))
    write_results(rows, out_path, plan)
    return rows


def _cell_str(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_results(rows: list[dict], out_path, plan: ExperimentPlan | None = None) -> None:
    """Write the results CSV plus an overhead sidecar.

    Measured learning overhead is wall-clock noise, so it would break the
    guarantee that identical invocations produce byte-identical result
    files; the main file keeps the column empty and the measured values go
    to <out>.overhead.csv.
    """
    with open(out_path, "w", newline="") as fh:
        if plan is not None:
            fh.write(
                f"# methods={','.join(plan.methods)} percentiles={plan.percentiles} "
                f"seeds={len(plan.seeds)} interval={plan.interval_s}\n"
            )
        w = csv.writer(fh)
        w.writerow(RESULT_FIELDS)
        for r in rows:
            deterministic = {f: r.get(f) for f in RESULT_FIELDS}
            deterministic["overhead_s"] = None
            w.writerow([_cell_str(deterministic[f]) for f in RESULT_FIELDS])
        for method, mean_re in summarize(rows).items():
            w.writerow(["__mean__", method, "", "", "", "", "", _cell_str(mean_re),
                        "", "", ""])
    with open(str(out_path) + ".overhead.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["workload", "method", "problem", "percentile", "budget", "seed",
                    "overhead_s", "overhead_per_sample_s"])
        for r in rows:
            n = max(1, r["samples_completed"] + r["samples_terminated"])
            w.writerow([
                _cell_str(r.get("workload")), r["method"], r["problem"],
                _cell_str(r["percentile"]), _cell_str(r["budget"]), r["seed"],
                _cell_str(r["overhead_s"]), _cell_str(r["overhead_s"] / n),
            ])


def summarize(rows: list[dict]) -> dict[str, float | None]:
    """Mean RE per method over rows where RE is defined."""
    out: dict[str, float | None] = {}
    for method in sorted({r["method"] for r in rows}):
        res = [r["re"] for r in rows if r["method"] == method and r["re"] is not None]
        out[method] = float(np.mean(res)) if res else None
    return out
