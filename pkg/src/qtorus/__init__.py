"""Exact computations in quantum tori, chord algebras and q-holonomic recursions."""

from qtorus._kernels import BACKEND
from qtorus.scalars import Laurent, Scalar

__all__ = ["BACKEND", "Laurent", "Scalar"]
__version__ = "0.1.0"
