"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (numpy fallbacks in
touchdecode.kernels); a failed compile therefore downgrades to a warning
instead of aborting the install.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            warnings.warn(f"native kernels not built ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"native kernels not built ({exc}); using pure-Python fallback")


ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "touchdecode._native",
                ["src/touchdecode/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    warnings.warn("Cython or numpy unavailable at build time; skipping native kernels")

setup(
    ext_modules=ext_modules,
    cmdclass={"build_ext": optional_build_ext},
)
