"""Backend selection for the hot kernels.

The compiled extension is used when importable; otherwise, or when the
environment variable ``GAUSSMIX_PURE_PYTHON=1`` is set, the pure-Python
twin is used.  Both expose the same functions.
"""
import os

if os.environ.get("GAUSSMIX_PURE_PYTHON") == "1":
    from . import _kernels_py as backend
else:
    try:
        from . import _kernels as backend
    except ImportError:
        from . import _kernels_py as backend

from . import _kernels_py as python_backend

BACKEND = backend.BACKEND


def compiled_backend():
    """Return the compiled module, or ``None`` if it is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
