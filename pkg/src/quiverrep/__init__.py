"""Exact computations with interval-finite quivers and their representations."""

from quiverrep.linalg import BACKEND, Field, Matrix

__all__ = ["BACKEND", "Field", "Matrix"]
__version__ = "0.1.0"
