from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "floqcc._logderiv",
                ["src/floqcc/_logderiv.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level="3",
    )
except ImportError:
    # No Cython: the package falls back to the pure-numpy kernel at import.
    ext_modules = []

setup(ext_modules=ext_modules)
