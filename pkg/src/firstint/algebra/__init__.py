"""Exact and certified scalars plus sparse graded series arithmetic."""

from .scalars import (
    DEFAULT_PRECISION,
    MAX_PRECISION,
    Ball,
    Scalar,
    format_scalar,
    get_precision,
    is_exact,
    iv_precision,
    is_zero,
    log2_abs,
    sign_of,
    to_scalar,
    with_precision_retry,
    working_precision,
)
from .series import (
    INF,
    HomogPoly,
    TruncSeries,
    compose,
    diff,
    grade,
    monomials,
    mul,
    mul_degree,
    reassemble,
)

__all__ = [
    "DEFAULT_PRECISION",
    "MAX_PRECISION",
    "Ball",
    "Scalar",
    "format_scalar",
    "get_precision",
    "is_exact",
    "iv_precision",
    "is_zero",
    "log2_abs",
    "sign_of",
    "to_scalar",
    "with_precision_retry",
    "working_precision",
    "INF",
    "HomogPoly",
    "TruncSeries",
    "compose",
    "diff",
    "grade",
    "monomials",
    "mul",
    "mul_degree",
    "reassemble",
]
