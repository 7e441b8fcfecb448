"""Exact noncommutative algebra of field, Dirac-matrix and derivative operators."""

from .coeff import GaussQ
from .dsl import DSLError, parse_operator, to_dsl
from .expr import (
    BASES,
    DEFAULT_WINDOW,
    MEASURES,
    CoordinateLeakError,
    FieldSymbol,
    OperatorExpr,
    OperatorTerm,
    TermKey,
    TruncationError,
    Window,
    adjoint,
    anticommutator,
    commutator,
    commutator_with_coordinate,
    coord_op,
    deriv_op,
    even_part,
    exp_conjugate,
    field,
    field_op,
    filter_terms,
    is_two_component,
    mass,
    matrix_op,
    measure,
    min_grade,
    momentum,
    momentum_squared,
    multiply,
    normal_form,
    odd_part,
    scalar,
    substitute,
    upper_block,
    with_window,
    zero,
    zero_fields,
)
from .rewrite import DEFAULT_RULES, NO_RULES, RewriteRuleSet, apply_rewrites, reduce_symbol

__all__ = [name for name in dir() if not name.startswith("_")]
