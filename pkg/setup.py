"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure numpy implementation is
selected at import time), so a failed compile only costs speed.
"""

import sys

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "lexkit._ckernels",
                ["src/lexkit/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"lexkit: skipping compiled kernels ({exc}); pure-python fallback will be used",
          file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
