"""Build script for the compiled stencil kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so the build is marked optional and a failed compile only
costs performance. `-ffp-contract=off` keeps the C arithmetic bitwise
identical to the NumPy kernels (no fused multiply-add), which the test
suite asserts.
"""

import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None and os.path.exists("src/phcslab/fdtd/_stencil.pyx"):
    ext = Extension(
        "phcslab.fdtd._stencil",
        sources=["src/phcslab/fdtd/_stencil.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    extensions = cythonize([ext], compiler_directives={"language_level": "3"})

setup(ext_modules=extensions)
