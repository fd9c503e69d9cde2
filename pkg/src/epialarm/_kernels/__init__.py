"""Hot-kernel selection.

The compiled Cython extension is preferred; the NumPy fallback is used when
the extension is missing (pure-Python install) or when ``EPIALARM_PURE`` is
set in the environment. ``IMPL`` reports which one is active.
"""

import os

if os.environ.get("EPIALARM_PURE"):
    from . import _pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

IMPL = _impl.IMPL

sir_path = _impl.sir_path
seir_path = _impl.seir_path
sir_loglik = _impl.sir_loglik
sir_loglik_pointwise = _impl.sir_loglik_pointwise
seir_loglik = _impl.seir_loglik
seir_loglik_pointwise = _impl.seir_loglik_pointwise

__all__ = [
    "IMPL",
    "sir_path",
    "seir_path",
    "sir_loglik",
    "sir_loglik_pointwise",
    "seir_loglik",
    "seir_loglik_pointwise",
]
