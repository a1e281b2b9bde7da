"""Precision plumbing shared by the numeric modules."""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

DEFAULT_PRECISION_BITS = 256


def mpf_of(x):
    """Convert int / Fraction / decimal string / mpf to an mpf at the current precision."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, str) and "/" in x:
        return mpf_of(Fraction(x))
    return mpmath.mpf(x)


def margin(bits: int):
    """Global comparison margin 2^-(bits/2)."""
    return mpmath.ldexp(mpmath.mpf(1), -(bits // 2))


def decimal_digits(bits: int) -> int:
    return int(math.ceil(bits * math.log10(2))) + 2


def to_decimal(x, bits: int) -> str:
    """Deterministic decimal string carrying the full working precision."""
    with mpmath.workprec(bits):
        x = mpf_of(x)
        if x == 0:
            return "0"
        return mpmath.nstr(x, decimal_digits(bits), strip_zeros=True, min_fixed=-8, max_fixed=40)


def to_exact_or_decimal(x, bits: int) -> str:
    if isinstance(x, (int, Fraction)):
        return str(Fraction(x))
    return to_decimal(x, bits)


def parse_number(text: str):
    """Inverse of ``to_exact_or_decimal``: 'p/q' and integers stay exact."""
    text = text.strip()
    if "/" in text or ("." not in text and "e" not in text.lower()):
        return Fraction(text)
    return mpmath.mpf(text)
