"""Kernel dispatch: the compiled extension when importable, else pure Python.

Set ``FGLFANS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"

if not os.environ.get("FGLFANS_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

mul_terms = _impl.mul_terms
eliminate_unit_pivots = _impl.eliminate_unit_pivots
lincomb = _impl.lincomb

__all__ = ["BACKEND", "mul_terms", "eliminate_unit_pivots", "lincomb"]
