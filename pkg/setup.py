"""Build script: compiles the optional Cython kernel.

The package is fully functional without the extension (a pure-Python
interpreter with identical semantics is selected at import time), so any
failure to cythonize or compile downgrades to a source-only install.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/gridsynth/kernel/_ckernel.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))
except Exception as exc:  # noqa: BLE001 - any build issue means "no extension"
    print(f"gridsynth: skipping compiled kernel ({exc})", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
