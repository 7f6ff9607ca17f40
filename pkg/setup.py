"""Build the optional compiled kernel; the package falls back to numpy without it."""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("KOTHE_CHAOS_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("kothe_chaos._kernels", ["src/kothe_chaos/_kernels.pyx"],
                       include_dirs=[numpy.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
