"""Build the optional compiled detection kernels.

The package imports and runs without them; ``airbeam.kernels`` falls back
to the numpy implementation when the extension is missing.
"""
import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("AIRBEAM_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "airbeam._detect",
                ["src/airbeam/_detect.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
