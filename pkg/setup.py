"""Build the optional compiled kernels.

If Cython or a C compiler is missing the package still installs and the
pure-Python kernels are used instead.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ARTIFACT_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "artifact._ckernels",
                    ["src/artifact/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-fcx-limited-range"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - build environment dependent
        print(f"compiled kernels disabled: {exc}")
        ext_modules = []

setup(ext_modules=ext_modules)
