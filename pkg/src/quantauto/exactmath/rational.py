"""Exact rationals and their wire format.

All rational values in the library are ``fractions.Fraction`` instances,
which are always stored in lowest terms with a positive denominator.  This
module only adds the ASCII wire format: ``"num/den"`` with the denominator
omitted when it equals 1.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import ParseError

Rational = Fraction


def parse_rational(text: str | int) -> Fraction:
    """Parse ``"num/den"`` or ``"num"`` into a Fraction.

    A zero denominator is a parse error, not an arithmetic one.
    """
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"expected rational string, got {type(text).__name__}")
    body = text.strip()
    num_s, sep, den_s = body.partition("/")
    try:
        num = int(num_s)
        den = int(den_s) if sep else 1
    except ValueError:
        raise ParseError(f"malformed rational {text!r}") from None
    if den == 0:
        raise ParseError(f"zero denominator in rational {text!r}")
    return Fraction(num, den)


def format_rational(value: Fraction) -> str:
    """Render a Fraction as ``num/den``, omitting a unit denominator."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
