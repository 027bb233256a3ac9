"""Build script for the optional compiled plasticity kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the FE solver faster.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "femrisk.femodel._kernel._core",
                ["src/femrisk/femodel/_kernel/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
