"""Parsing and formatting of exact rationals."""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Union

Number = Union[Fraction, float, int]


def parse_rational(text) -> Fraction:
    """Parse "p/q", an integer, or a decimal string into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text).limit_denominator(10**12)
    return Fraction(str(text).strip())


def fmt_rational(x: Number) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def fmt_decimal(x: Number, digits: int = 15) -> str:
    """Decimal with `digits` significant digits."""
    if isinstance(x, Fraction):
        with localcontext() as ctx:
            ctx.prec = digits
            d = Decimal(x.numerator) / Decimal(x.denominator)
        return format(d, "g") if d != 0 else "0"
    return format(float(x), f".{digits}g")


def number_record(x: Number) -> dict:
    """JSON record carrying both the exact and the decimal form."""
    if isinstance(x, Fraction):
        return {"exact": fmt_rational(x), "decimal": fmt_decimal(x)}
    return {"exact": None, "decimal": fmt_decimal(x)}


def sqrt_decimal(x: Fraction, digits: int = 50) -> Decimal:
    """Square root of a nonnegative rational to `digits` significant digits."""
    if x < 0:
        raise ValueError("negative argument")
    with localcontext() as ctx:
        ctx.prec = digits + 5
        d = (Decimal(x.numerator) / Decimal(x.denominator)).sqrt()
        ctx.prec = digits
        return +d


def exact_sqrt(x: Fraction) -> Fraction | None:
    """Exact rational square root if one exists."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sqrt_record(square: Fraction) -> dict:
    """Record for a quantity known exactly through its square."""
    root = exact_sqrt(square)
    return {
        "square": fmt_rational(square),
        "exact": fmt_rational(root) if root is not None else f"sqrt({fmt_rational(square)})",
        "decimal": format(sqrt_decimal(square, 15), "g"),
        "decimal50": format(sqrt_decimal(square, 50), "f"),
    }
