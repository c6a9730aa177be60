"""Exact polynomial and linear algebra used by the identifiability engines."""

from .linalg import bareiss_det, exact_rank, symbolic_det
from .poly import (
    MultiPoly,
    elementary_symmetric,
    elementary_symmetric_values,
    param_symbol,
    parse_param_symbol,
    symbol_key,
)
from .univariate import (
    UniPoly,
    complex_roots,
    interpolate_univariate,
    real_roots,
    recover_multiset,
)

__all__ = [
    "MultiPoly",
    "UniPoly",
    "bareiss_det",
    "complex_roots",
    "elementary_symmetric",
    "elementary_symmetric_values",
    "exact_rank",
    "interpolate_univariate",
    "param_symbol",
    "parse_param_symbol",
    "real_roots",
    "recover_multiset",
    "symbol_key",
    "symbolic_det",
]
