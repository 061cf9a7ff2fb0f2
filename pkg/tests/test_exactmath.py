"""Exact arithmetic: rationals, polynomials, Taylor truncation, quadrature."""

from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest

from quantauto.errors import AccuracyError, ParseError, StructureError, ValidationError
from quantauto.exactmath import (
    Box,
    MultiPoly,
    add,
    const,
    exp_of,
    format_rational,
    integrate_box,
    l1_norm,
    mul,
    parse_rational,
    poly_mul,
    quad_numeric,
    taylor,
    to_multipoly,
    var,
)
from quantauto.exactmath.funcexpr import evaluate_exact

F = Fraction
X = MultiPoly.variable(1, 0)
HALF = MultiPoly.constant(1, F(1, 2))


def rand_poly(rng, nvars, max_deg=3, terms=4):
    out = MultiPoly.zero(nvars)
    for _ in range(terms):
        expo = tuple(rng.randint(0, max_deg) for _ in range(nvars))
        coeff = F(rng.randint(-9, 9), rng.randint(1, 9))
        out = out + MultiPoly(nvars, {expo: coeff})
    return out


def rand_box(rng, nvars):
    ivs = []
    for _ in range(nvars):
        a = F(rng.randint(0, 3), 4)
        b = a + F(rng.randint(1, 4), 4)
        ivs.append((a, b))
    return Box(ivs)


# -- rationals ---------------------------------------------------------------


def test_rational_wire_format():
    assert parse_rational("3/4") == F(3, 4)
    assert parse_rational("2") == F(2)
    assert parse_rational("-1/3") == F(-1, 3)
    assert format_rational(F(6, 8)) == "3/4"
    assert format_rational(F(5)) == "5"


def test_rational_zero_denominator_is_parse_error():
    with pytest.raises(ParseError):
        parse_rational("1/0")


def test_rational_canonical_after_arithmetic():
    rng = random.Random(1)
    for _ in range(200):
        a = F(rng.randint(-50, 50), rng.randint(1, 50))
        b = F(rng.randint(-50, 50), rng.randint(1, 50))
        for value in (a + b, a - b, a * b):
            assert value.denominator > 0
            import math

            assert math.gcd(abs(value.numerator), value.denominator) == 1
        assert parse_rational(format_rational(a)) == a


# -- polynomial algebra ------------------------------------------------------


def test_poly_mul_expansion():
    # (x + 1/2)(1/2 - x) = 1/4 - x^2
    left = X + HALF
    right = HALF - X
    assert poly_mul(left, right) == MultiPoly(1, {(0,): F(1, 4), (2,): F(-1)})


def test_poly_mul_identity():
    p = X * X + HALF
    assert poly_mul(p, MultiPoly.constant(1, 1)) == p


def test_poly_mul_square():
    q = MultiPoly(1, {(0,): F(1, 4), (2,): F(-1)})
    assert poly_mul(q, q) == MultiPoly(1, {(0,): F(1, 16), (2,): F(-1, 2), (4,): F(1)})


def test_poly_mul_mismatched_variables():
    with pytest.raises(StructureError):
        poly_mul(X, MultiPoly.variable(2, 0))


def test_integrate_box_separation_constants():
    box = Box([(F(0), F(1, 2))])
    assert integrate_box((X + HALF) * (HALF - X), box) == F(1, 12)
    assert integrate_box(((X + HALF) * (HALF - X)) ** 2, box) == F(1, 60)


def test_integrate_unit_box_constant():
    for m in (1, 2, 3):
        assert integrate_box(MultiPoly.constant(m, 1), Box.unit(m)) == 1


def test_integrate_box_linearity():
    rng = random.Random(7)
    for _ in range(30):
        nvars = rng.randint(1, 3)
        p, q = rand_poly(rng, nvars), rand_poly(rng, nvars)
        box = rand_box(rng, nvars)
        assert integrate_box(p + q, box) == integrate_box(p, box) + integrate_box(q, box)


# -- Taylor truncation -------------------------------------------------------


def test_taylor_exp_degree_two():
    assert taylor(exp_of(var(0)), 2, 1) == MultiPoly(
        1, {(0,): F(1), (1,): F(1), (2,): F(1, 2)}
    )


def test_taylor_exp_degree_zero():
    assert taylor(exp_of(var(0)), 0, 1) == MultiPoly.constant(1, 1)


def test_taylor_of_polynomial_is_identity_pointwise():
    # polynomials of degree <= the truncation bound pass through; checked
    # against direct evaluation at 100 random rational points
    rng = random.Random(11)
    expr = add(
        mul(const(F(3, 7)), var(0), var(0)),
        mul(const(F(-2, 5)), var(1)),
        const(F(1, 3)),
    )
    trunc = taylor(expr, 4, 2)
    assert trunc == to_multipoly(expr, 2)
    for _ in range(100):
        point = (F(rng.randint(-8, 8), rng.randint(1, 8)), F(rng.randint(-8, 8), rng.randint(1, 8)))
        assert trunc.evaluate(point) == evaluate_exact(expr, point)


def test_taylor_truncates_high_degrees():
    cubic = mul(var(0), var(0), var(0))
    assert taylor(cubic, 2, 1).is_zero()


def test_taylor_rejects_shifted_exponential():
    with pytest.raises(StructureError):
        taylor(exp_of(add(var(0), const(1))), 3, 1)
    with pytest.raises(StructureError):
        taylor(exp_of(mul(var(0), var(0))), 3, 1)


def test_taylor_multivariate_exp_of_linear_argument():
    # exp(x1 + 2 x2) truncated to total degree 2
    lin = add(var(0), mul(const(2), var(1)))
    got = taylor(exp_of(lin), 2, 2)
    expected = MultiPoly(2, {
        (0, 0): F(1), (1, 0): F(1), (0, 1): F(2),
        (2, 0): F(1, 2), (1, 1): F(2), (0, 2): F(2),
    })
    assert got == expected


# -- numeric quadrature ------------------------------------------------------


def test_quad_exponential_reaches_e_minus_one():
    value, bound = quad_numeric(exp_of(var(0)), Box.unit(1), F(1, 10**15))
    with mpmath.workdps(40):
        assert abs(value - (mpmath.e - 1)) < mpmath.mpf("1e-14")
    assert bound <= mpmath.mpf("1e-15")


def test_quad_zero_integrand():
    value, bound = quad_numeric(const(0), Box.unit(1), F(1, 10**12))
    assert value == 0 and bound == 0


def test_quad_agrees_with_exact_integration():
    # oracle: exact box integration of 50 random polynomials
    rng = random.Random(23)
    for _ in range(50):
        nvars = rng.randint(1, 2)
        p = rand_poly(rng, nvars, max_deg=3, terms=3)
        box = rand_box(rng, nvars)
        expr = _poly_expr(p)
        exact = integrate_box(p, box)
        value, bound = quad_numeric(expr, box, F(1, 10**10))
        with mpmath.workdps(40):
            target = mpmath.mpf(exact.numerator) / exact.denominator
            assert abs(value - target) <= bound + mpmath.mpf("1e-30")


def _poly_expr(p: MultiPoly):
    from quantauto.exactmath import from_multipoly

    return from_multipoly(p)


def test_quad_budget_exhaustion_reports_best_bound():
    with pytest.raises(AccuracyError) as err:
        quad_numeric(exp_of(var(0)), Box.unit(1), F(1, 10**25), max_evals=20)
    assert err.value.bound is not None


# -- L1 norms ----------------------------------------------------------------


def test_l1_norm_linear_pieces():
    box = Box([(F(0), F(1, 2))])
    up = add(var(0), const(F(1, 2)))
    down = add(const(F(1, 2)), mul(const(-1), var(0)))
    assert l1_norm(up, box).exact == F(3, 8)
    assert l1_norm(down, box).exact == F(1, 8)


def test_l1_norm_exponential():
    got = l1_norm(exp_of(var(0)), Box.unit(1))
    with mpmath.workdps(40):
        assert abs(got.approx - (mpmath.e - 1)) < mpmath.mpf("1e-11")


def test_l1_norm_flags_negative_sample():
    down = add(const(F(1, 2)), mul(const(-1), var(0)))
    with pytest.raises(ValidationError) as err:
        l1_norm(down, Box.unit(1))
    assert "sample point" in str(err.value)
