"""Exact cusp combinatorics for Hilbert modular varieties of level Gamma_1(n) over real quadratic fields."""

from .field import RealQuadraticField, field
from .ideals import FractionalIdeal, InvalidIdeal, parse_ideal

__version__ = "0.1.0"

__all__ = ["RealQuadraticField", "FractionalIdeal", "InvalidIdeal", "field", "parse_ideal", "__version__"]
