"""Command-line entry points: run one search, sweep a plan, query the
brute-force oracle, or generate a synthetic trace."""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import click
import numpy as np

from tune import baselines, harness
from tune.execution import DEFAULT_INTERVAL_S, WorkloadTrace
from tune.space import load_space


def _bundled_space(name: str) -> Path:
    return Path(str(resources.files("tune").joinpath("data", name)))


@click.group()
def main():
    """Configuration autotuner with predictive early termination."""


@main.command()
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--space", "space_path", required=True, type=click.Path(exists=True))
@click.option("--problem", type=click.Choice(sorted(harness.PROBLEMS)), default="lup")
@click.option("--method", type=click.Choice(baselines.VARIANTS), default="cello")
@click.option("--percentile", type=float, default=50.0)
@click.option("--budget", type=float, required=True, help="Search budget in seconds.")
@click.option("--interval", type=float, default=DEFAULT_INTERVAL_S,
              help="Monitoring interval in seconds.")
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", required=True, type=click.Path())
def run(trace_path, space_path, problem, method, percentile, budget, interval, seed,
        out_path):
    """Run one search and write a single-row results file."""
    space = load_space(space_path)
    trace = WorkloadTrace.from_csv(trace_path, space)
    cell = harness.run_cell(trace, problem, method, percentile, budget, seed, interval)
    cell["workload"] = Path(trace_path).stem
    harness.write_results([cell], out_path)
    click.echo(f"best_value={cell['best_value']} re={cell['re']} "
               f"completed={cell['samples_completed']} "
               f"terminated={cell['samples_terminated']}")


@main.command()
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def sweep(plan_path, out_path):
    """Run every (trace, method, constraint, budget, seed) cell of a plan."""
    plan = harness.load_plan(plan_path)
    rows = harness.run_plan(plan, out_path)
    for method, mean_re in harness.summarize(rows).items():
        click.echo(f"{method}: mean RE = {mean_re}")


@main.command()
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--space", "space_path", required=True, type=click.Path(exists=True))
@click.option("--problem", type=click.Choice(sorted(harness.PROBLEMS)), default="lup")
@click.option("--percentile", type=float, default=50.0)
def oracle(trace_path, space_path, problem, percentile):
    """Print the brute-force optimum over the recorded pool."""
    space = load_space(space_path)
    trace = WorkloadTrace.from_csv(trace_path, space)
    _, metric = harness.PROBLEMS[problem]
    constraint = harness.constraint_from_percentile(trace, metric, percentile)
    y_opt, config = harness.oracle_optimum(trace, problem, constraint)
    if y_opt is None:
        click.echo("no feasible configuration")
        sys.exit(1)
    click.echo(f"constraint={constraint!r}")
    click.echo(f"optimum={y_opt!r}")
    click.echo("config=" + ",".join(str(v) for v in config.values))


@main.command("gen-trace")
@click.option("--seed", type=int, default=0)
@click.option("--rows", type=int, default=500)
@click.option("--space", "space_path", type=click.Path(exists=True), default=None,
              help="Space definition; defaults to the bundled synthetic space.")
@click.option("--median-latency", type=float, default=60.0)
@click.option("--out", "out_path", required=True, type=click.Path())
def gen_trace(seed, rows, space_path, median_latency, out_path):
    """Generate a seeded synthetic workload trace."""
    path = Path(space_path) if space_path else _bundled_space("synthetic8.yaml")
    space = load_space(path)
    trace = harness.generate_trace(space, rows, seed, median_latency_s=median_latency)
    trace.to_csv(out_path)
    click.echo(f"wrote {rows} rows to {out_path} (space: {path})")


@main.command()
@click.option("--points", type=int, default=200, help="Rows per node evaluation.")
@click.option("--features", type=int, default=10)
@click.option("--repeats", type=int, default=200)
def bench(points, features, repeats):
    """Compare the compiled and numpy split kernels."""
    from tune.benchmark import run_benchmark

    for line in run_benchmark(points, features, repeats):
        click.echo(line)


if __name__ == "__main__":
    main()
