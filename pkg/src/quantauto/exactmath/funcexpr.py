"""Transition-function expressions.

Expression trees over rational constants, clock variables, addition,
multiplication, and the exponential applied to an affine argument.  An
expression is polynomial iff it contains no exponential node; polynomial
expressions convert losslessly to MultiPoly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import mpmath

from ..errors import StructureError
from .multipoly import MultiPoly


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Add:
    left: "FuncExpr"
    right: "FuncExpr"


@dataclass(frozen=True)
class Mul:
    left: "FuncExpr"
    right: "FuncExpr"


@dataclass(frozen=True)
class Exp:
    arg: "FuncExpr"


FuncExpr = Union[Const, Var, Add, Mul, Exp]


def const(value) -> Const:
    return Const(Fraction(value))


def var(index: int) -> Var:
    return Var(index)


def add(*parts: FuncExpr) -> FuncExpr:
    if not parts:
        return Const(Fraction(0))
    out = parts[0]
    for p in parts[1:]:
        out = Add(out, p)
    return out


def mul(*parts: FuncExpr) -> FuncExpr:
    if not parts:
        return Const(Fraction(1))
    out = parts[0]
    for p in parts[1:]:
        out = Mul(out, p)
    return out


def exp_of(arg: FuncExpr) -> Exp:
    return Exp(arg)


def contains_exp(e: FuncExpr) -> bool:
    if isinstance(e, Exp):
        return True
    if isinstance(e, (Add, Mul)):
        return contains_exp(e.left) or contains_exp(e.right)
    return False


def is_polynomial(e: FuncExpr) -> bool:
    return not contains_exp(e)


def check_expr(e: FuncExpr, nvars: int) -> list[str]:
    """Structural validation: variable ranges and affine exp arguments."""
    problems: list[str] = []

    def walk(node: FuncExpr) -> None:
        if isinstance(node, Const):
            return
        if isinstance(node, Var):
            if not 0 <= node.index < nvars:
                problems.append(f"variable x{node.index + 1} out of range (m={nvars})")
            return
        if isinstance(node, (Add, Mul)):
            walk(node.left)
            walk(node.right)
            return
        if isinstance(node, Exp):
            if contains_exp(node.arg):
                problems.append("nested exponential")
            else:
                arg_poly = to_multipoly(node.arg, nvars, _unchecked=True)
                if arg_poly.total_degree() > 1:
                    problems.append("exponential applied to a non-affine argument")
            walk(node.arg)
            return
        problems.append(f"unsupported expression node {type(node).__name__}")

    walk(e)
    return problems


def to_multipoly(e: FuncExpr, nvars: int, _unchecked: bool = False) -> MultiPoly:
    """Exact conversion of a polynomial expression; errors on exp nodes."""
    if isinstance(e, Const):
        return MultiPoly.constant(nvars, e.value)
    if isinstance(e, Var):
        if not _unchecked and not 0 <= e.index < nvars:
            raise StructureError(f"variable x{e.index + 1} out of range")
        return MultiPoly.variable(nvars, e.index)
    if isinstance(e, Add):
        return to_multipoly(e.left, nvars, _unchecked) + to_multipoly(e.right, nvars, _unchecked)
    if isinstance(e, Mul):
        return to_multipoly(e.left, nvars, _unchecked) * to_multipoly(e.right, nvars, _unchecked)
    if isinstance(e, Exp):
        raise StructureError("expression is not polynomial (contains exp)")
    raise StructureError(f"unsupported expression node {type(e).__name__}")


def from_multipoly(p: MultiPoly) -> FuncExpr:
    """Expression tree equal to the polynomial (canonical monomial order)."""
    if p.is_zero():
        return Const(Fraction(0))
    parts: list[FuncExpr] = []
    for expo in sorted(p.terms):
        factors: list[FuncExpr] = [Const(p.terms[expo])]
        for r, e in enumerate(expo):
            factors.extend(Var(r) for _ in range(e))
        parts.append(mul(*factors))
    return add(*parts)


def evaluate_exact(e: FuncExpr, point: Sequence[Fraction]) -> Fraction:
    """Exact rational evaluation; errors on exp nodes."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return Fraction(point[e.index])
    if isinstance(e, Add):
        return evaluate_exact(e.left, point) + evaluate_exact(e.right, point)
    if isinstance(e, Mul):
        return evaluate_exact(e.left, point) * evaluate_exact(e.right, point)
    raise StructureError("exact evaluation requires a polynomial expression")


def taylor(e: FuncExpr, degree: int, nvars: int) -> MultiPoly:
    """Maclaurin truncation of the expression to total degree ``degree``.

    Exactness requires each exponential argument to have zero constant
    term; otherwise the coefficients would involve e^a with a != 0, which
    is irrational.  Such inputs are rejected as structural errors.
    """
    if degree < 0:
        raise StructureError("Taylor degree must be a natural number")

    def walk(node: FuncExpr) -> MultiPoly:
        if isinstance(node, Const):
            return MultiPoly.constant(nvars, node.value)
        if isinstance(node, Var):
            return MultiPoly.variable(nvars, node.index).truncated(degree)
        if isinstance(node, Add):
            return walk(node.left) + walk(node.right)
        if isinstance(node, Mul):
            return (walk(node.left) * walk(node.right)).truncated(degree)
        if isinstance(node, Exp):
            lin = to_multipoly(node.arg, nvars)
            if lin.total_degree() > 1:
                raise StructureError("exp argument is not affine")
            if lin.constant_value() != 0:
                raise StructureError(
                    "exp argument has a nonzero constant term; "
                    "its Maclaurin coefficients are not rational"
                )
            acc = MultiPoly.constant(nvars, 1)
            term = MultiPoly.constant(nvars, 1)
            for k in range(1, degree + 1):
                term = (term * lin).truncated(degree) * Fraction(1, k)
                if term.is_zero():
                    break
                acc = acc + term
            return acc
        raise StructureError(f"unsupported expression node {type(node).__name__}")

    return walk(e).truncated(degree)


def compile_mpf(e: FuncExpr) -> Callable[[Sequence], "mpmath.mpf"]:
    """Compile to an mpmath evaluator (arbitrary working precision)."""

    def run(node: FuncExpr, point) -> mpmath.mpf:
        if isinstance(node, Const):
            return mpmath.mpf(node.value.numerator) / node.value.denominator
        if isinstance(node, Var):
            return mpmath.mpf(point[node.index])
        if isinstance(node, Add):
            return run(node.left, point) + run(node.right, point)
        if isinstance(node, Mul):
            return run(node.left, point) * run(node.right, point)
        if isinstance(node, Exp):
            return mpmath.e ** run(node.arg, point)
        raise StructureError(f"unsupported expression node {type(node).__name__}")

    return lambda point: run(e, point)


def compile_numpy(e: FuncExpr) -> Callable:
    """Compile to a vectorized float evaluator over (n, m) sample arrays."""
    import numpy as np

    def run(node: FuncExpr, pts):
        if isinstance(node, Const):
            return np.full(pts.shape[0], float(node.value))
        if isinstance(node, Var):
            return pts[:, node.index]
        if isinstance(node, Add):
            return run(node.left, pts) + run(node.right, pts)
        if isinstance(node, Mul):
            return run(node.left, pts) * run(node.right, pts)
        if isinstance(node, Exp):
            return np.exp(run(node.arg, pts))
        raise StructureError(f"unsupported expression node {type(node).__name__}")

    return lambda pts: run(e, pts)


def evaluate_numeric(e: FuncExpr, point: Sequence[Fraction]) -> float:
    """Float evaluation used only for sign checks on non-polynomial trees."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        return float(point[e.index])
    if isinstance(e, Add):
        return evaluate_numeric(e.left, point) + evaluate_numeric(e.right, point)
    if isinstance(e, Mul):
        return evaluate_numeric(e.left, point) * evaluate_numeric(e.right, point)
    if isinstance(e, Exp):
        return math.exp(evaluate_numeric(e.arg, point))
    raise StructureError(f"unsupported expression node {type(e).__name__}")
