"""Build script.

The compiled kernel module is optional: if Cython or a C compiler is
unavailable the package installs pure, and conestab._kernels falls back to
the Python reference implementation at import time.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CONESTAB_NO_NATIVE", "0") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "conestab._kernels._native",
                    ["src/conestab/_kernels/_native.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
