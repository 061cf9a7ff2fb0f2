"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial in m clock variables is a finite map from exponent vectors
(m-tuples of naturals) to nonzero Fraction coefficients.  The zero
polynomial is the empty map.  All arithmetic is exact; the class is
immutable and hashable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from ..errors import StructureError
from .boxes import Box

Exponent = tuple[int, ...]


class MultiPoly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, Fraction] | None = None):
        if nvars < 0:
            raise StructureError("nvars must be >= 0")
        clean: dict[Exponent, Fraction] = {}
        for expo, coeff in (terms or {}).items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != nvars or any(e < 0 for e in expo):
                raise StructureError(f"exponent vector {expo} invalid for {nvars} variables")
            coeff = Fraction(coeff)
            if coeff != 0:
                clean[expo] = coeff
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *_):
        raise AttributeError("MultiPoly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars: int, value) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: Fraction(value)})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MultiPoly":
        if not 0 <= index < nvars:
            raise StructureError(f"variable index {index} out of range for {nvars} variables")
        expo = tuple(1 if r == index else 0 for r in range(nvars))
        return cls(nvars, {expo: Fraction(1)})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in expo) for expo in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(expo) for expo in self.terms)

    def coefficient(self, expo: Exponent) -> Fraction:
        return self.terms.get(tuple(expo), Fraction(0))

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise StructureError("polynomials have different variable lists")
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(self.nvars, other)
        raise StructureError(f"cannot combine MultiPoly with {type(other).__name__}")

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        terms = dict(self.terms)
        for expo, coeff in other.terms.items():
            terms[expo] = terms.get(expo, Fraction(0)) + coeff
        return MultiPoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        terms: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                expo = tuple(a + b for a, b in zip(e1, e2))
                terms[expo] = terms.get(expo, Fraction(0)) + c1 * c2
        return MultiPoly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise StructureError("negative polynomial power")
        result = MultiPoly.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def truncated(self, max_total_degree: int) -> "MultiPoly":
        """Drop every monomial of total degree above the bound."""
        return MultiPoly(
            self.nvars,
            {e: c for e, c in self.terms.items() if sum(e) <= max_total_degree},
        )

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        if len(point) != self.nvars:
            raise StructureError("evaluation point dimension mismatch")
        point = [Fraction(x) for x in point]
        total = Fraction(0)
        for expo, coeff in self.terms.items():
            term = coeff
            for x, e in zip(point, expo):
                if e:
                    term *= x**e
            total += term
        return total

    # -- dunder plumbing ---------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "MultiPoly(0)"
        bits = []
        for expo in sorted(self.terms):
            coeff = self.terms[expo]
            mono = "*".join(f"x{r + 1}^{e}" for r, e in enumerate(expo) if e)
            bits.append(f"{coeff}" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(bits) + ")"


def poly_mul(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    """Exact product of two polynomials over the same variable list."""
    return p * q


def integrate_box(p: MultiPoly, box: Box) -> Fraction:
    """Exact iterated integral of p over the box.

    Each monomial ``prod c_r^{e_r}`` contributes
    ``prod_r (hi^(e+1) - lo^(e+1)) / (e+1)``.
    """
    if box.nvars != p.nvars:
        raise StructureError("box does not cover the polynomial's variables")
    total = Fraction(0)
    for expo, coeff in p.terms.items():
        term = coeff
        for (lo, hi), e in zip(box.intervals, expo):
            term *= (hi ** (e + 1) - lo ** (e + 1)) / Fraction(e + 1)
        total += term
    return total
