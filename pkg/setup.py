"""Build script for the optional compiled kernels.

The package works without the extension: malta._kernels falls back to the
NumPy implementation when the compiled module is missing. Set
MALTA_SKIP_NATIVE=1 to skip the compile step entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Try to build the extension; degrade to the pure fallback on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            _warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            _warn(exc)


def _warn(exc):
    print(
        f"warning: native kernel build failed ({exc}); "
        "the pure NumPy fallback will be used",
        file=sys.stderr,
    )


def extensions():
    if os.environ.get("MALTA_SKIP_NATIVE"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        _warn(exc)
        return []
    ext = Extension(
        "malta._kernels._native",
        ["src/malta/_kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
