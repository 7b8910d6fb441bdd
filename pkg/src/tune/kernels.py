"""Backend selection for the hot split-search kernel.

The compiled Cython kernel is preferred; a numpy implementation of the same
contract is used when the extension is missing or when TUNE_SPLIT_BACKEND=py
is set (handy for benchmarking the two side by side).
"""

import os

if os.environ.get("TUNE_SPLIT_BACKEND") == "py":
    from tune._split_np import best_split

    BACKEND = "numpy"
else:
    try:
        from tune._split_cy import best_split  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from tune._split_np import best_split  # type: ignore[no-redef]

        BACKEND = "numpy"

__all__ = ["best_split", "BACKEND"]
