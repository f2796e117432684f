"""Column/row subset selection by interlacing polynomials."""

from __future__ import annotations

__version__ = "0.1.0"

from .bounds import BoundReport, bound_gcss, bound_submatrix, laguerre_maxroot_bound
from .errors import (
    ConditioningError,
    DegenerateDirectionError,
    DivisibilityError,
    InterlaceError,
    InvalidInputError,
    NotApplicableError,
    ParseError,
    RankDeficiencyError,
    TooLargeError,
)
from .expected import (
    PATHS,
    expected_poly,
    expected_poly_bivariate,
    expected_poly_css,
    expected_poly_definition,
    expected_poly_gcss,
    expected_poly_h_determinant,
    expected_poly_identity,
    subset_poly,
)
from .polynomial import Poly, RootBracket, maxroot_eta, sturm_count
from .problem import GcrssProblem
from .selection import (
    SelectionConfig,
    SelectionResult,
    select_css,
    select_gcrss,
    select_gcss,
    select_submatrix,
)

__all__ = [
    "BoundReport",
    "ConditioningError",
    "DegenerateDirectionError",
    "DivisibilityError",
    "GcrssProblem",
    "InterlaceError",
    "InvalidInputError",
    "NotApplicableError",
    "PATHS",
    "ParseError",
    "Poly",
    "RankDeficiencyError",
    "RootBracket",
    "SelectionConfig",
    "SelectionResult",
    "TooLargeError",
    "bound_gcss",
    "bound_submatrix",
    "expected_poly",
    "expected_poly_bivariate",
    "expected_poly_css",
    "expected_poly_definition",
    "expected_poly_gcss",
    "expected_poly_h_determinant",
    "expected_poly_identity",
    "laguerre_maxroot_bound",
    "maxroot_eta",
    "select_css",
    "select_gcrss",
    "select_gcss",
    "select_submatrix",
    "sturm_count",
    "subset_poly",
]
