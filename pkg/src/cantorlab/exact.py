"""Exact rational helpers.

All probabilities in the package are :class:`fractions.Fraction` values; this
module only adds lossless text conversion and a couple of dyadic shortcuts.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Rational = Fraction

RationalLike = Union[Fraction, int, str]


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ``value`` to a Fraction, refusing floats (they are not exact)."""
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a Fraction, int or 'a/b' string")
    if isinstance(value, str):
        return parse_rational(value)
    return Fraction(value)


def parse_rational(text: str) -> Fraction:
    """Parse ``"a/b"`` or ``"a"`` (decimal integers only)."""
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        if sep:
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational of the form a/b: {text!r}") from exc


def format_rational(value: Fraction) -> str:
    """Serialize as ``"numerator/denominator"``, always with the slash."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def pow2(k: int) -> Fraction:
    """2**k as a Fraction, for any integer k."""
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def coprime_fraction(numerator: int, denominator: int) -> Fraction:
    """Build a Fraction from integers already known to be in lowest terms.

    Skips the gcd, which is quadratic in CPython and dominates for
    million-digit values. The caller is responsible for coprimality.
    """
    make = getattr(Fraction, "_from_coprime_ints", None)
    if make is not None:  # Python >= 3.12
        return make(numerator, denominator)
    return Fraction(numerator, denominator, _normalize=False)
