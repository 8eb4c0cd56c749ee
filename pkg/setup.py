"""Build script for the optional compiled shooting kernel.

The package is fully functional without the extension: nlslab._kernels
falls back to a pure-Python integrator at import time.  Compilation is
attempted here and skipped with a warning if Cython or a C compiler is
unavailable.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "nlslab._kernels._shooting",
                sources=["src/nlslab/_kernels/_shooting.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    sys.stderr.write(f"warning: compiled kernel skipped ({exc}); using pure-Python fallback\n")

setup(ext_modules=ext_modules)
