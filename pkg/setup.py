"""Build script: compiles the optional Cython interval kernel.

The package works without the extension (a pure-Python twin is selected at
import time), so a failed compile only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "satreach._kernel._core_c",
                ["src/satreach/_kernel/_core_c.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
