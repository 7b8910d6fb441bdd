#!/usr/bin/env python
"""Benchmark the compiled split kernel against the numpy fallback across a
range of node sizes. Run after installing the package."""

from tune.benchmark import run_benchmark

if __name__ == "__main__":
    for points in (50, 200, 1000):
        for line in run_benchmark(points=points, features=10, repeats=100):
            print(line)
        print()
