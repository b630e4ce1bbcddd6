"""Simulation kernels: the compiled extension when it is built, numpy otherwise.

Set ``RAIDD_KERNELS=python`` to force the numpy implementation.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("RAIDD_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

propagate = _impl.propagate
disagreement = _impl.disagreement

__all__ = ["BACKEND", "propagate", "disagreement"]
