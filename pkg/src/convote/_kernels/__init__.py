"""Hot kernels: SMO dual solver and Dinic max-flow.

The compiled extension is used when it was built and ``CONVOTE_PURE`` is not
set; otherwise the pure-Python module with the same signatures is loaded.
"""
import os

from . import _pure

try:
    if os.environ.get("CONVOTE_PURE", "") not in ("", "0"):
        raise ImportError("pure kernels requested")
    from . import _fast as _impl
    BACKEND = "compiled"
except ImportError:
    _impl = _pure
    BACKEND = "python"

smo_solve = _impl.smo_solve
max_flow = _impl.max_flow

__all__ = ["BACKEND", "smo_solve", "max_flow", "_pure"]
