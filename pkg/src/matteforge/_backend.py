"""Select the compiled Jacobi kernel, falling back to NumPy.

Set ``MATTEFORGE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _jacobi_py

BACKEND = "python"
jacobi_iterate = _jacobi_py.jacobi_iterate

if os.environ.get("MATTEFORGE_PURE_PYTHON") != "1":
    try:
        from ._jacobi import jacobi_iterate  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass


def thread_count() -> int:
    """Worker count from ``MATTEFORGE_THREADS`` (0 or unset means all cores)."""
    raw = os.environ.get("MATTEFORGE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n
