"""Build script: compiles the optional kernel extension.

The package works without the extension (atomlink.kernels falls back to the
pure-numpy backend), so a failed compile only costs speed. The extension
links against numpy's static npyrandom library to draw from the same bit
generators as numpy.random.Generator.
"""

import os

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    nprand_lib = os.path.join(os.path.dirname(numpy.random.__file__), "lib")
    ext_modules = cythonize(
        [
            Extension(
                "atomlink.kernels._native",
                ["src/atomlink/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                library_dirs=[nprand_lib],
                libraries=["npyrandom"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
