"""Matching kernel with backend selection at import time.

The compiled Cython backend is used when its extension module built; the
pure-Python module is the drop-in fallback. ``PTRGRAPH_KERNEL=pure`` forces
the fallback (handy for benchmarking and differential tests).
"""

from __future__ import annotations

import os

from ptrgraph._kernel import _pymatch

if os.environ.get("PTRGRAPH_KERNEL") == "pure":
    _impl = _pymatch
else:
    try:
        from ptrgraph._kernel import _cmatch as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pymatch

BACKEND: str = _impl.BACKEND
enumerate_embeddings = _impl.enumerate_embeddings


def backend() -> str:
    """Name of the active kernel backend: "compiled" or "pure"."""
    return BACKEND
