"""Kernel selection: compiled extension when built, numpy otherwise.

Set ``KOTHE_CHAOS_PURE=1`` to force the numpy path.
"""

import os

from . import _kernels_py

BACKEND = "python"
orbit_distances = _kernels_py.orbit_distances

if not os.environ.get("KOTHE_CHAOS_PURE"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        orbit_distances = _compiled.orbit_distances
        BACKEND = "cython"

__all__ = ["BACKEND", "orbit_distances"]
