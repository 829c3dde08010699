"""Kernel selection: compiled extension when importable, else pure Python.

Set ``QTORUS_PURE=1`` to force the Python kernels.
"""

import os

BACKEND = "python"

if os.environ.get("QTORUS_PURE", "") not in ("", "0"):
    from qtorus._pykernels import poly_add, poly_mul, twisted_mul
else:
    try:
        from qtorus._ckernels import poly_add, poly_mul, twisted_mul

        BACKEND = "cython"
    except ImportError:  # extension not built
        from qtorus._pykernels import poly_add, poly_mul, twisted_mul

__all__ = ["BACKEND", "poly_add", "poly_mul", "twisted_mul"]
