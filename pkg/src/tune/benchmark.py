"""Timing comparison of the compiled and numpy split kernels."""

from __future__ import annotations

import time

import numpy as np

from tune import _split_np


def _load_cython():
    try:
        from tune import _split_cy

        return _split_cy.best_split
    except ImportError:
        return None


def _time(fn, X, grad, hess, repeats) -> float:
    fn(X, grad, hess, 1)  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn(X, grad, hess, 1)
    return (time.perf_counter() - start) / repeats


def run_benchmark(points: int = 200, features: int = 10, repeats: int = 200) -> list[str]:
    rng = np.random.default_rng(0)
    X = np.ascontiguousarray(rng.normal(size=(points, features)))
    grad = rng.normal(size=points)
    hess = np.ones(points)
    lines = [f"best_split on {points} x {features}, {repeats} repeats"]
    t_np = _time(_split_np.best_split, X, grad, hess, repeats)
    lines.append(f"  numpy fallback : {t_np * 1e6:9.1f} us/call")
    cy = _load_cython()
    if cy is None:
        lines.append("  cython kernel  : not built")
        return lines
    t_cy = _time(cy, X, grad, hess, repeats)
    lines.append(f"  cython kernel  : {t_cy * 1e6:9.1f} us/call")
    lines.append(f"  speedup        : {t_np / t_cy:9.2f}x")
    a = _split_np.best_split(X, grad, hess, 1)
    b = cy(X, grad, hess, 1)
    lines.append(f"  backends agree : {a[0] == b[0] and abs(a[2] - b[2]) < 1e-9}")
    return lines
