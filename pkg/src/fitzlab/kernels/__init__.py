"""Backend selection for the numeric kernels.

The numba backend is used when numba imports and ``FITZLAB_NO_JIT`` is unset
(or ``0``); otherwise the pure-numpy backend is used. Both expose the same
functions with the same evaluation order.
"""

import os

from . import _numpy

NORM_CODES = {"l1": 0, "l2": 1, "linf": 2}


def _jit_wanted() -> bool:
    return os.environ.get("FITZLAB_NO_JIT", "0").strip().lower() in ("", "0", "false", "no")


try:
    if not _jit_wanted():
        raise ImportError("JIT disabled by FITZLAB_NO_JIT")
    from . import _numba as backend

    BACKEND = "numba"
except ImportError:
    backend = _numpy
    BACKEND = "numpy"


def available_backends() -> dict:
    out = {"numpy": _numpy}
    try:
        from . import _numba

        out["numba"] = _numba
    except ImportError:  # pragma: no cover - numba missing
        pass
    return out


conjugate_brute = backend.conjugate_brute
legendre_axis = backend.legendre_axis
monotone_scan = backend.monotone_scan
related_scan = backend.related_scan
fitzpatrick_eval = backend.fitzpatrick_eval
ni_eval = backend.ni_eval
midpoint_scan = backend.midpoint_scan
inf_conv = backend.inf_conv
range_hits = backend.range_hits
subgradient_scan = backend.subgradient_scan

__all__ = [
    "BACKEND",
    "NORM_CODES",
    "available_backends",
    "conjugate_brute",
    "legendre_axis",
    "monotone_scan",
    "related_scan",
    "fitzpatrick_eval",
    "ni_eval",
    "midpoint_scan",
    "inf_conv",
    "range_hits",
    "subgradient_scan",
]
