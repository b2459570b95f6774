"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
fallback takes over. Set ``LATENTODE_PURE=1`` to force the fallback.
"""

import os

from latentode import _fallback

BACKEND = "python"

if os.environ.get("LATENTODE_PURE", "") not in ("1", "true", "yes"):
    try:
        from latentode import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

cd_gram = _impl.cd_gram
rk4_poly = _impl.rk4_poly

__all__ = ["BACKEND", "cd_gram", "rk4_poly"]
