"""Build script for the optional Cython split kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile is downgraded to a warning.
"""

import warnings

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tune._split_cy",
                ["src/tune/_split_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError as exc:  # pragma: no cover
    warnings.warn(f"Cython/numpy unavailable, building without the compiled kernel: {exc}")

setup(ext_modules=ext_modules)
