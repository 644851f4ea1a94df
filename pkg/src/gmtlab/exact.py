"""Exact numbers of the form ``q * 2**e`` with rational ``q > 0`` and rational ``e``.

Non-concentration constants such as ``count * r**-s / |P|`` are of this form
when ``s`` is rational; comparing them exactly only needs integer powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

from .errors import PreconditionError


def to_fraction(x) -> Fraction:
    """Parse ints, Fractions, decimal strings and ``"p/q"`` strings exactly.

    Floats are converted through their shortest decimal repr, so ``0.1``
    becomes ``1/10`` rather than the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise PreconditionError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise PreconditionError(f"non-finite number {x}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise PreconditionError(f"cannot parse {x!r} as a rational") from None
    if isinstance(x, dict) and "num" in x and "den" in x:
        return Fraction(int(x["num"]), int(x["den"]))
    raise PreconditionError(f"cannot interpret {x!r} as a rational")


def frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


@total_ordering
@dataclass(frozen=True)
class Pow2Rational:
    coef: Fraction
    exp: Fraction = Fraction(0)

    def __post_init__(self):
        if self.coef <= 0:
            raise PreconditionError("Pow2Rational needs a positive coefficient")

    @classmethod
    def of(cls, x) -> "Pow2Rational":
        if isinstance(x, Pow2Rational):
            return x
        return cls(to_fraction(x), Fraction(0))

    def normalized(self) -> "Pow2Rational":
        """Move the integer part of the exponent into the coefficient."""
        k = math.floor(self.exp)
        coef = self.coef * (Fraction(2) ** k)
        return Pow2Rational(coef, self.exp - k)

    def _cmp(self, other) -> int:
        other = Pow2Rational.of(other)
        r = self.coef / other.coef           # compare r with 2**(other.exp - self.exp)
        e = other.exp - self.exp
        p, q = e.numerator, e.denominator
        lhs_n, lhs_d = r.numerator ** q, r.denominator ** q
        if p >= 0:
            a, b = lhs_n, lhs_d * (1 << p)
        else:
            a, b = lhs_n * (1 << -p), lhs_d
        return (a > b) - (a < b)

    def __eq__(self, other):
        if not isinstance(other, (Pow2Rational, Fraction, int)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __hash__(self):
        n = self.normalized()
        return hash((n.coef, n.exp))

    def __mul__(self, other):
        other = Pow2Rational.of(other)
        return Pow2Rational(self.coef * other.coef, self.exp + other.exp)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Pow2Rational.of(other)
        return Pow2Rational(self.coef / other.coef, self.exp - other.exp)

    def is_rational(self) -> bool:
        return self.exp.denominator == 1

    def __float__(self):
        return float(self.coef) * 2.0 ** float(self.exp)

    def log2(self) -> float:
        return math.log2(self.coef.numerator) - math.log2(self.coef.denominator) + float(self.exp)

    def approx(self, max_den: int = 10**6) -> Fraction:
        """Exact value when rational, otherwise a close rational approximation."""
        n = self.normalized()
        if n.exp == 0:
            return n.coef
        return Fraction(float(n)).limit_denominator(max_den)

    def to_dict(self) -> dict:
        n = self.normalized()
        a = self.approx()
        return {"C_num": a.numerator, "C_den": a.denominator,
                "exact": n.exp == 0,
                "coef": frac_str(n.coef), "pow2": frac_str(n.exp),
                "value": float(n)}
