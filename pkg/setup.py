"""Build the optional compiled kernel module.

The extension is optional: if compilation fails the package still installs and
``gansynth.kernels`` falls back to the numpy implementations.
"""
import os
import sys

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - cython is a build requirement
    cythonize = None

compile_args = ["-O3", "-fno-math-errno", "-ffp-contract=off"]
if os.environ.get("GANSYNTH_PORTABLE", "0") != "1" and sys.platform != "win32":
    compile_args.append("-march=native")


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using numpy fallback")


extensions = [
    Extension(
        "gansynth._ckernels",
        ["src/gansynth/_ckernels.pyx"],
        include_dirs=[np.get_include(), "src/gansynth"],
        extra_compile_args=compile_args,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"})
    if cythonize is not None
    else [],
    cmdclass={"build_ext": OptionalBuildExt},
)
