"""Build script: compiles the optional geometry kernel extension.

The extension is a performance accelerator only. If Cython or a C compiler
is unavailable the install proceeds and the package falls back to the
pure-Python kernels at import time (see pachinqo.kernels).
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "pachinqo.kernels._core",
                sources=["src/pachinqo/kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
