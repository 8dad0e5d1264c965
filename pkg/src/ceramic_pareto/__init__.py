"""Biobjective shape optimization of ceramic joints: failure intensity vs. volume."""
from .errors import ShapeError

__version__ = "0.1.0"

__all__ = ["ShapeError", "__version__"]
