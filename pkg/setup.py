"""Build script for the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import time); set PRIVFORM_SKIP_EXT=1 to skip compiling it entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PRIVFORM_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "privform.kernels._impl_cy",
                    ["src/privform/kernels/_impl_cy.pyx"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
