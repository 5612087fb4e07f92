"""Numerical core: compiled kernels with a pure-python fallback.

The Cython extension is used when it was built; set ``CCJJ_PURE_PYTHON=1``
to force the numpy implementation (useful for benchmarking and debugging).
"""

import os

from . import _kernels_py

if os.environ.get("CCJJ_PURE_PYTHON"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    """Which kernel implementation is active: 'compiled' or 'python'."""
    return "python" if kernels is _kernels_py else "compiled"
