"""Build script: compiles the matching-year kernel if a toolchain is present.

The package works without the extension (a NumPy reference implementation is
selected at import time), so a failed compile only costs speed.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Degrade to the pure-Python install when the extension cannot build."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing or broken
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(f"warning: compiled kernel skipped ({exc}); "
              "falling back to the NumPy implementation", file=sys.stderr)


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "matchsim._kernels",
        sources=["src/matchsim/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
