"""Builds the optional compiled search kernel.

The package works without it (a pure-Python kernel is selected at import
time); building the extension just makes the per-layer grouping search much
faster. Set HEADBALANCE_NO_EXT=1 to skip the extension entirely.

-ffp-contract=off keeps the C arithmetic bit-identical to the pure-Python
kernel (no fused multiply-adds), which the backend parity tests rely on.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HEADBALANCE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "headbalance._kernel._fastpath",
                    sources=["src/headbalance/_kernel/_fastpath.pyx"],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
