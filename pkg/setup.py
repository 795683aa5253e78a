"""Build script.

The compiled kernel extension is optional: if Cython or a C compiler is
unavailable the package installs anyway and falls back to the pure
NumPy implementations in ``lmimo._kernels``.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/lmimo/_kernels/_ops_cy.pyx"],
        language_level=3,
    )
    include_dirs = [np.get_include()]
except ImportError:
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
