"""Tiny directed-rounding interval helpers (dyadic endpoints, exact integers).

Only what the report constant check needs: square roots and base-2
logarithms with rigorous enclosures.  No floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt


def sqrt_bounds(n: int, bits: int) -> tuple[Fraction, Fraction]:
    """Enclosure of sqrt(n) with width <= 2^-bits."""
    s = isqrt(n << (2 * bits))
    lo = Fraction(s, 1 << bits)
    hi = lo if s * s == n << (2 * bits) else Fraction(s + 1, 1 << bits)
    return lo, hi


def _log2_digits(x_num: int, x_den: int, nbits: int, bits: int, round_up: bool) -> Fraction:
    """Binary digits of log2(x) for x in [1, 2) by square-and-halve.

    One-sided: with round_up the iterate dominates the true value pointwise
    and the digit value plus the tail bound is an upper bound; with floor
    rounding the digit value is a lower bound.
    """
    scale = 1 << bits
    if round_up:
        X = -((-x_num * scale) // x_den)
    else:
        X = (x_num * scale) // x_den
    val = Fraction(0)
    for i in range(1, nbits + 1):
        sq = X * X
        X = -((-sq) // scale) if round_up else sq // scale
        if X >= 2 * scale:
            X = -((-X) // 2) if round_up else X // 2
            val += Fraction(1, 1 << i)
    return val


def log2_bounds(lo: Fraction, hi: Fraction, nbits: int = 40, bits: int = 96) -> tuple[Fraction, Fraction]:
    """Enclosure of log2(x) given an enclosure [lo, hi] of x > 0."""
    if lo <= 0:
        raise ValueError("log2 needs a positive enclosure")
    shift = 0
    while hi >= 2:
        lo /= 2
        hi /= 2
        shift += 1
    while lo < 1:
        lo *= 2
        hi *= 2
        shift -= 1
    if hi >= 2:
        # enclosure straddles a power of two: widen the upper run into [1,2)
        out_lo = _log2_digits(lo.numerator, lo.denominator, nbits, bits, False)
        out_hi = Fraction(1) + _log2_digits(hi.numerator, 2 * hi.denominator, nbits, bits, True) + Fraction(1, 1 << nbits)
    else:
        out_lo = _log2_digits(lo.numerator, lo.denominator, nbits, bits, False)
        out_hi = _log2_digits(hi.numerator, hi.denominator, nbits, bits, True) + Fraction(1, 1 << nbits)
    return out_lo + shift, out_hi + shift


def power_saving_delta_bounds(nbits: int = 40) -> tuple[Fraction, Fraction]:
    """Enclosure of (2 - log2(1 + sqrt(3))) / 4 with width < 2^-nbits-ish."""
    s_lo, s_hi = sqrt_bounds(3, nbits + 16)
    l_lo, l_hi = log2_bounds(1 + s_lo, 1 + s_hi, nbits=nbits + 8)
    return (2 - l_hi) / 4, (2 - l_lo) / 4
