"""Backend selection for the hot numerical kernels.

The compiled extension is preferred when present; the pure-NumPy module
is the fallback and the reference semantics.  Both produce identical
floating-point results.  Selection can be forced with the environment
variable ``BOUSSAMR_KERNELS`` set to ``auto`` (default), ``cython``, or
``python``.
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("BOUSSAMR_KERNELS", "auto").strip().lower()
if _requested not in ("auto", "cython", "python"):
    raise RuntimeError(f"BOUSSAMR_KERNELS must be auto, cython, or python (got {_requested!r})")

_impl = None
if _requested in ("auto", "cython"):
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "cython":
            raise RuntimeError("BOUSSAMR_KERNELS=cython but the compiled extension is not built")
        _impl = None
if _impl is None:
    _impl = _kernels_py

BACKEND: str = _impl.BACKEND
FROUDE_CAP: float = _kernels_py.FROUDE_CAP
LIMITER_MINMOD: int = _kernels_py.LIMITER_MINMOD
LIMITER_MC: int = _kernels_py.LIMITER_MC

capped_velocity = _kernels_py.capped_velocity
fwave_fluctuations = _impl.fwave_fluctuations
swe_sweep = _impl.swe_sweep
thomas_solve = _impl.thomas_solve
thomas_pivot_solve = _impl.thomas_pivot_solve


def backend_name() -> str:
    return BACKEND
