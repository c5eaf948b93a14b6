"""Exact harmonic analysis on complex semisimple quantum groups."""

from .rootdata import RootDatum, WeylElement, parse_weight
from .scalars import FourierPoly, NumericContext, Scalar, q_pow, qnum

__all__ = [
    "RootDatum",
    "WeylElement",
    "parse_weight",
    "FourierPoly",
    "NumericContext",
    "Scalar",
    "q_pow",
    "qnum",
]

__version__ = "0.1.0"
