"""Measure values: exact rationals, or numeric estimates with error bounds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import mpmath

from .rational import format_rational


@dataclass(frozen=True)
class MeasureValue:
    """Either Exact(rational) or Approx(value, error_bound).

    Approx values carry mpmath floats so bounds well below double precision
    remain meaningful.
    """

    exact: Fraction | None = None
    approx: Any = None
    error_bound: Any = None

    @classmethod
    def from_exact(cls, value) -> "MeasureValue":
        return cls(exact=Fraction(value))

    @classmethod
    def from_approx(cls, value, error_bound) -> "MeasureValue":
        return cls(exact=None, approx=mpmath.mpf(value), error_bound=mpmath.mpf(error_bound))

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def as_float(self) -> float:
        if self.is_exact:
            return float(self.exact)
        return float(self.approx)

    def as_mpf(self) -> "mpmath.mpf":
        if self.is_exact:
            return mpmath.mpf(self.exact.numerator) / self.exact.denominator
        return self.approx

    def bound_mpf(self) -> "mpmath.mpf":
        return mpmath.mpf(0) if self.is_exact else self.error_bound

    def plus(self, other: "MeasureValue") -> "MeasureValue":
        if self.is_exact and other.is_exact:
            return MeasureValue.from_exact(self.exact + other.exact)
        return MeasureValue.from_approx(
            self.as_mpf() + other.as_mpf(), self.bound_mpf() + other.bound_mpf()
        )

    def times(self, other: "MeasureValue") -> "MeasureValue":
        if self.is_exact and other.is_exact:
            return MeasureValue.from_exact(self.exact * other.exact)
        a, b = self.as_mpf(), other.as_mpf()
        ea, eb = self.bound_mpf(), other.bound_mpf()
        return MeasureValue.from_approx(a * b, abs(a) * eb + abs(b) * ea + ea * eb)

    def serialize(self):
        if self.is_exact:
            return format_rational(self.exact)
        return {
            "approx": mpmath.nstr(self.approx, 40),
            "err": mpmath.nstr(self.error_bound, 10),
        }

    def __repr__(self) -> str:
        if self.is_exact:
            return f"MeasureValue({format_rational(self.exact)})"
        return f"MeasureValue(~{mpmath.nstr(self.approx, 20)} +/- {mpmath.nstr(self.error_bound, 5)})"
