"""Moments of quadratic L-functions over the hyperelliptic ensemble of F_q[t]."""

from .fqarith import FieldSpec, Poly, field, format_poly, parse_poly
from .charsum import QuadChar, chi, jacobi
from .lfunc import LPolynomial, build_lpoly, ensemble_lpolys
from .moments import ShiftConfig, mu_sigma, shifted_moment

__all__ = [
    "FieldSpec", "Poly", "field", "format_poly", "parse_poly",
    "QuadChar", "chi", "jacobi",
    "LPolynomial", "build_lpoly", "ensemble_lpolys",
    "ShiftConfig", "mu_sigma", "shifted_moment",
]

__version__ = "0.1.0"
