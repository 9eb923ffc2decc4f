"""Execution kernel with a compiled core and a pure-Python fallback.

The backend is chosen at import time: the Cython extension when it built,
otherwise the Python twin. Set GRIDSYNTH_KERNEL=python to force the fallback
(useful for the equivalence tests and the benchmark).
"""
import os

from gridsynth.kernel import pykernel
from gridsynth.kernel.bytecode import (
    CompiledProgram,
    KernelUnsupportedError,
    compile_term,
)

if os.environ.get("GRIDSYNTH_KERNEL", "").lower() in ("py", "python"):
    _impl = pykernel
else:
    try:
        from gridsynth.kernel import _ckernel as _impl
    except ImportError:
        _impl = pykernel

BACKEND = _impl.BACKEND_NAME
execute = _impl.execute
check_trajectory = _impl.check_trajectory

__all__ = [
    "BACKEND",
    "CompiledProgram",
    "KernelUnsupportedError",
    "compile_term",
    "execute",
    "check_trajectory",
]
