"""Exact rational arithmetic, polynomial algebra, and controlled quadrature."""

from .boxes import Box
from .funcexpr import (
    Add,
    Const,
    Exp,
    FuncExpr,
    Mul,
    Var,
    add,
    check_expr,
    compile_mpf,
    compile_numpy,
    const,
    contains_exp,
    evaluate_exact,
    evaluate_numeric,
    exp_of,
    from_multipoly,
    is_polynomial,
    mul,
    taylor,
    to_multipoly,
    var,
)
from .multipoly import MultiPoly, integrate_box, poly_mul
from .quadrature import l1_norm, quad_callable, quad_numeric
from .rational import Rational, format_rational, parse_rational
from .values import MeasureValue

__all__ = [
    "Add",
    "Box",
    "Const",
    "Exp",
    "FuncExpr",
    "MeasureValue",
    "Mul",
    "MultiPoly",
    "Rational",
    "Var",
    "add",
    "check_expr",
    "compile_mpf",
    "compile_numpy",
    "const",
    "contains_exp",
    "evaluate_exact",
    "evaluate_numeric",
    "exp_of",
    "format_rational",
    "from_multipoly",
    "integrate_box",
    "is_polynomial",
    "l1_norm",
    "mul",
    "parse_rational",
    "poly_mul",
    "quad_callable",
    "quad_numeric",
    "taylor",
    "to_multipoly",
    "var",
]
