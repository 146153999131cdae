"""Backend selection for the sweep kernel.

The compiled extension ``otdiag._ckernels`` is used when it imports; otherwise
the numpy implementation in ``otdiag._pykernels`` takes over.  Setting the
environment variable ``OTDIAG_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _pykernels

__all__ = ["BACKEND", "available_backends", "get_backend"]

_BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    _BACKENDS["cython"] = _ckernels

if _ckernels is not None and not os.environ.get("OTDIAG_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None):
    """Kernel module for ``name`` (``"cython"`` or ``"python"``); default is :data:`BACKEND`."""
    name = BACKEND if name is None else name
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"kernel backend {name!r} not available (have {available_backends()})") from None
