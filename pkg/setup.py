import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "boussamr._kernels_cy",
                ["src/boussamr/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
else:
    # No Cython available: install the pure-Python kernels only.  The
    # package selects the NumPy backend at import time when the compiled
    # module is missing.
    ext_modules = []

setup(ext_modules=ext_modules)
