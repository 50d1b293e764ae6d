"""Build script for the optional compiled kernel extension.

The package installs and works without the extension (a numpy fallback is
selected at import time); the extension only accelerates the hot kernels.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "laddergnn._kernels",
                ["src/laddergnn/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps results bitwise identical to the
                # numpy fallback (no FMA fusion inside the accumulations).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
