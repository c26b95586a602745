"""
Exact rendering of rational money values
"""
from decimal import Decimal, ROUND_HALF_EVEN, localcontext
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Union

Rational = Union[int, Fraction]

DECIMAL_DIGITS = 12


def to_fraction(value: Rational) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def is_terminating(value: Fraction) -> bool:
    """True when the decimal expansion of value is finite"""
    den = value.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def exact_decimal(value: Fraction) -> str:
    """Finite decimal expansion of a terminating fraction"""
    if not is_terminating(value):
        raise ValueError(f"{value} has no finite decimal expansion")
    sign = '-' if value < 0 else ''
    value = abs(value)
    whole, rest = divmod(value.numerator, value.denominator)
    if rest == 0:
        return f"{sign}{whole}"
    digits = []
    while rest:
        rest *= 10
        d, rest = divmod(rest, value.denominator)
        digits.append(str(d))
    return f"{sign}{whole}.{''.join(digits)}"


def approximate(value: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    quantum = Decimal(1).scaleb(-digits)
    with localcontext() as ctx:
        ctx.prec = 60
        result = (Decimal(value.numerator) / Decimal(value.denominator)).quantize(
            quantum, rounding=ROUND_HALF_EVEN)
    return f"{result:f}"


def format_rational(value: Rational, digits: int = DECIMAL_DIGITS) -> str:
    """
    "20/3 (6.666666666667)" for repeating values, "2.5" for terminating ones.
    """
    value = to_fraction(value)
    if is_terminating(value):
        return exact_decimal(value)
    return f"{value.numerator}/{value.denominator} ({approximate(value, digits)})"


def exact_sqrt(value: Fraction):
    """Square root as a Fraction when value is a rational square, else None"""
    if value < 0:
        raise ValueError("negative value")
    num_root = isqrt(value.numerator)
    den_root = isqrt(value.denominator)
    if num_root * num_root == value.numerator and den_root * den_root == value.denominator:
        return Fraction(num_root, den_root)
    return None


def format_sqrt(value: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """Square root of a non-negative rational, exact when possible"""
    root = exact_sqrt(value)
    if root is not None:
        return format_rational(root, digits)
    quantum = Decimal(1).scaleb(-digits)
    with localcontext() as ctx:
        ctx.prec = 60
        result = (Decimal(value.numerator) / Decimal(value.denominator)).sqrt().quantize(
            quantum, rounding=ROUND_HALF_EVEN)
    return f"{result:f}"


@lru_cache(maxsize=None)
def harmonic(k: int) -> Fraction:
    """H_k = 1 + 1/2 + ... + 1/k, with H_0 = 0"""
    if k < 0:
        raise ValueError("k must be non-negative")
    return sum((Fraction(1, j) for j in range(1, k + 1)), Fraction(0))
