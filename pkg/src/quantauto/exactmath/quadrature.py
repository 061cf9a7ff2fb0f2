"""Controlled numeric quadrature for non-polynomial transition functions.

Composite Simpson sums on doubling partitions, iterated through a
Richardson extrapolation table per dimension, with adaptive interval
bisection where the table stalls.  All arithmetic runs at high working
precision (>= 64 decimal digits) so tolerances down to 1e-30 are
reachable.  The reported bound is the Richardson difference estimate; for
the smooth integrands used here (polynomials, exponentials of affine
maps, and piecewise-smooth normalization handles) it is reliable in
practice.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from ..errors import AccuracyError, UsageError, ValidationError
from .boxes import Box
from .funcexpr import (
    FuncExpr,
    compile_mpf,
    evaluate_exact,
    evaluate_numeric,
    is_polynomial,
    to_multipoly,
)
from .multipoly import integrate_box
from .values import MeasureValue

WORKING_DPS = 70
DEFAULT_MAX_EVALS = 10**7

_NEG_SLACK = mpmath.mpf("1e-45")


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def spend(self, n: int = 1) -> bool:
        self.left -= n
        return self.left >= 0


_LADDER_LEVELS = 12
_SPLIT_DEPTH = 40


def _simpson_ladder(
    g: Callable, a: "mpmath.mpf", b: "mpmath.mpf", tol: "mpmath.mpf", budget: _Budget
) -> tuple["mpmath.mpf", "mpmath.mpf", bool]:
    """Composite Simpson sums on doubling partitions of [a, b], iterated
    through a Richardson extrapolation table.

    The error estimate is the difference of successive table diagonals,
    which for smooth integrands shrinks far faster than plain interval
    halving.  Returns (value, estimate, converged); convergence means the
    estimate fell under tol within the level and budget caps.
    """
    width = b - a
    trapezoid = width / 2 * (g(a) + g(b))
    budget.spend(2)
    prev_row: list["mpmath.mpf"] = []
    best_val, best_est = trapezoid, abs(trapezoid) + 1
    points = 1
    for level in range(1, _LADDER_LEVELS + 1):
        points *= 2
        h = width / points
        if not budget.spend(points // 2):
            return best_val, best_est, False
        new = mpmath.mpf(0)
        for i in range(1, points, 2):
            new += g(a + i * h)
        trapezoid, prev_trapezoid = trapezoid / 2 + h * new, trapezoid
        row = [(4 * trapezoid - prev_trapezoid) / 3]
        for j, earlier in enumerate(prev_row):
            scale = mpmath.mpf(4) ** (j + 2) - 1
            row.append(row[j] + (row[j] - earlier) / scale)
        if prev_row:
            est = abs(row[-1] - prev_row[-1])
            best_val, best_est = row[-1], est
            if est <= tol:
                return best_val, est, True
        prev_row = row
    return best_val, best_est, False


def _integrate_1d(
    g: Callable,
    a: "mpmath.mpf",
    b: "mpmath.mpf",
    tol: "mpmath.mpf",
    budget: _Budget,
    depth: int = 0,
) -> tuple["mpmath.mpf", "mpmath.mpf"]:
    """Extrapolation ladder with adaptive bisection fallback: intervals
    where the ladder stalls (non-smooth points of normalization handles)
    are halved until their tolerance share is met or budgets run out."""
    if a == b:
        return mpmath.mpf(0), mpmath.mpf(0)
    value, est, converged = _simpson_ladder(g, a, b, tol, budget)
    if converged or depth >= _SPLIT_DEPTH or budget.left < 0:
        return value, est
    mid = (a + b) / 2
    lv, le = _integrate_1d(g, a, mid, tol / 2, budget, depth + 1)
    rv, re = _integrate_1d(g, mid, b, tol / 2, budget, depth + 1)
    return lv + rv, le + re


def quad_callable(
    fn: Callable[[Sequence], "mpmath.mpf"],
    box: Box,
    tol,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> tuple["mpmath.mpf", "mpmath.mpf"]:
    """Adaptive quadrature of an mpf-valued callable over a box.

    Dimensions are iterated: the integrand of each level is the adaptive
    integral of the next.  Tolerance is split between the outer rule and
    the inner integrals so the accumulated estimate stays below tol.
    """
    if tol is None or Fraction(tol) <= 0:
        raise UsageError("tolerance must be positive")
    with mpmath.workdps(WORKING_DPS):
        tol_mpf = mpmath.mpf(Fraction(tol).numerator) / Fraction(tol).denominator
        budget = _Budget(max_evals)

        def level(prefix: tuple, t: "mpmath.mpf") -> tuple["mpmath.mpf", "mpmath.mpf"]:
            d = len(prefix)
            if d == box.nvars:
                return fn(prefix), mpmath.mpf(0)
            lo, hi = box.intervals[d]
            a = mpmath.mpf(lo.numerator) / lo.denominator
            b = mpmath.mpf(hi.numerator) / hi.denominator
            if a == b:
                return mpmath.mpf(0), mpmath.mpf(0)
            width = b - a
            inner_tol = t / (2 * width)
            inner_err_max = [mpmath.mpf(0)]

            def g(x):
                val, ierr = level(prefix + (x,), inner_tol)
                if ierr > inner_err_max[0]:
                    inner_err_max[0] = ierr
                return val

            val, err = _integrate_1d(g, a, b, t / 2, budget)
            return val, err + width * inner_err_max[0]

        value, bound = level((), tol_mpf)
        if budget.left < 0 or bound > tol_mpf:
            raise AccuracyError(
                f"quadrature did not reach tol={tol} (best bound {mpmath.nstr(bound, 8)})",
                value=value,
                bound=bound,
            )
        return value, bound


def quad_numeric(
    f: FuncExpr, box: Box, tol, max_evals: int = DEFAULT_MAX_EVALS
) -> tuple["mpmath.mpf", "mpmath.mpf"]:
    """Adaptive quadrature of an expression tree over a box.

    Returns (approximation, error_bound) with
    |approximation - true| <= error_bound <= tol on success.
    """
    return quad_callable(compile_mpf(f), box, tol, max_evals)


def l1_norm(
    f: FuncExpr,
    box: Box,
    tol=Fraction(1, 10**12),
    max_evals: int = DEFAULT_MAX_EVALS,
) -> MeasureValue:
    """Integral of a nonnegative expression over its domain box.

    Nonnegativity is validated on the deterministic corner-plus-seeded
    sample grid; a failing sample point is reported.  Polynomial inputs
    integrate exactly, everything else goes through quad_numeric.
    """
    polynomial = is_polynomial(f)
    for point in box.sample_points():
        if polynomial:
            bad = evaluate_exact(f, point) < 0
        else:
            bad = evaluate_numeric(f, point) < float(-_NEG_SLACK)
        if bad:
            raise ValidationError(
                f"function is negative at sample point ({', '.join(str(x) for x in point)})"
            )
    if polynomial:
        return MeasureValue.from_exact(integrate_box(to_multipoly(f, box.nvars), box))
    value, bound = quad_numeric(f, box, tol, max_evals)
    return MeasureValue.from_approx(value, bound)
