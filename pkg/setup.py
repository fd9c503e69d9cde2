import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("EPIALARM_PURE_BUILD"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "epialarm._kernels._core",
                    ["src/epialarm/_kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython/numpy at build time: install pure-Python, the package
        # falls back to the numpy kernels at import.
        ext_modules = []

setup(ext_modules=ext_modules)
