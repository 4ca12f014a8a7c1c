"""Backend selection for the GF(2) hot kernels.

The compiled extension is preferred; the numpy fallback is used when it
is missing or when ``CONFQKD_PURE_PYTHON`` is set to a non-empty value.
``BACKEND`` names the active implementation.
"""
from __future__ import annotations

import os

from confqkd import _pykernels

if os.environ.get("CONFQKD_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from confqkd import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

rref = _impl.rref
coset_leaders = _impl.coset_leaders

__all__ = ["BACKEND", "rref", "coset_leaders"]
