"""Kernel backend selection.

The compiled extension is preferred when it built; the pure-Python module
is the reference implementation and the fallback.  Set NLSLAB_PURE_PYTHON=1
to force the fallback (used by the backend-agreement tests and benchmarks).
"""

import os

from .shooting_py import CROSSED, FAIL, RMAX, TURNED

_force_py = os.environ.get("NLSLAB_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    from . import shooting_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _shooting as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import shooting_py as _impl
        BACKEND = "python"

shoot = _impl.shoot
shoot_sampled = _impl.shoot_sampled

__all__ = ["shoot", "shoot_sampled", "BACKEND", "RMAX", "CROSSED", "TURNED", "FAIL"]
