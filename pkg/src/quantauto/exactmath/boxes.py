"""Axis-aligned boxes with rational endpoints.

A Box is a product of closed intervals, one per clock variable.  Machine
transition domains are required to live inside the unit cube with a
non-empty interior per axis; intersections computed internally may be
degenerate or empty.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Sequence

from ..errors import StructureError

_INTERIOR_DENOM = 2**20


class Box:
    """Product of closed rational intervals ``[lo_r, hi_r]``."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[tuple[Fraction, Fraction]]):
        ivs = []
        for lo, hi in intervals:
            lo, hi = Fraction(lo), Fraction(hi)
            if lo > hi:
                raise StructureError(f"interval [{lo}, {hi}] has lo > hi")
            ivs.append((lo, hi))
        self.intervals = tuple(ivs)

    @classmethod
    def unit(cls, nvars: int) -> "Box":
        return cls([(Fraction(0), Fraction(1))] * nvars)

    @property
    def nvars(self) -> int:
        return len(self.intervals)

    def volume(self) -> Fraction:
        vol = Fraction(1)
        for lo, hi in self.intervals:
            vol *= hi - lo
        return vol

    def is_degenerate(self) -> bool:
        return any(lo == hi for lo, hi in self.intervals)

    def contains(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.nvars:
            raise StructureError("point dimension does not match box")
        return all(lo <= x <= hi for (lo, hi), x in zip(self.intervals, point))

    def intersect(self, other: "Box") -> "Box | None":
        """Componentwise intersection; None when empty on some axis."""
        if other.nvars != self.nvars:
            raise StructureError("box dimensions differ")
        ivs = []
        for (a1, b1), (a2, b2) in zip(self.intervals, other.intervals):
            lo, hi = max(a1, a2), min(b1, b2)
            if lo > hi:
                return None
            ivs.append((lo, hi))
        return Box(ivs)

    def domain_violations(self) -> list[str]:
        """The machine-domain rule per axis: 0 <= lo < hi <= 1."""
        out = []
        for r, (lo, hi) in enumerate(self.intervals):
            if not (0 <= lo < hi <= 1):
                out.append(f"clock x{r + 1}: domain [{lo}, {hi}] violates 0 <= lo < hi <= 1")
        return out

    def sample_points(self, interior: int = 101, seed: int = 0) -> list[tuple[Fraction, ...]]:
        """Deterministic sample grid: the 2^m corners plus seeded rational
        interior points.  Used for sound-in-practice sign checks."""
        pts: list[tuple[Fraction, ...]] = []
        m = self.nvars
        if m == 0:
            return [()]
        if m <= 16:
            for mask in range(2**m):
                pts.append(tuple(self.intervals[r][mask >> r & 1] for r in range(m)))
        rng = random.Random(seed)
        for _ in range(interior):
            pt = []
            for lo, hi in self.intervals:
                t = Fraction(rng.randrange(_INTERIOR_DENOM + 1), _INTERIOR_DENOM)
                pt.append(lo + (hi - lo) * t)
            pts.append(tuple(pt))
        return pts

    def __eq__(self, other) -> bool:
        return isinstance(other, Box) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        body = ", ".join(f"[{lo}, {hi}]" for lo, hi in self.intervals)
        return f"Box({body})"
