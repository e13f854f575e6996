"""Build script for the optional compiled core.

The package works without the extension (a numpy fallback is selected at
import time), so compilation failures degrade to a warning rather than
aborting the install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext = Extension(
        "capdim._backend._core",
        ["src/capdim/_backend/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext_modules = cythonize([ext], language_level="3")
except Exception as exc:  # pragma: no cover - build-env dependent
    sys.stderr.write("capdim: skipping compiled core (%s); "
                     "the pure-python backend will be used\n" % exc)

setup(ext_modules=ext_modules)
