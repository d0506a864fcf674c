"""Conversions between exact scalars and mpmath floats."""

from fractions import Fraction

from mpmath import mp, mpf


def to_mpf(x):
    """Lossless where possible: ints and dyadics exactly, Fractions by
    dividing exact integers at the current precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def to_mpf_vec(xs):
    return tuple(to_mpf(x) for x in xs)


def mp_sup(xs):
    return max(abs(to_mpf(x)) for x in xs)
