"""Exact rationals and directed rounding to binary64.

Rationals are :class:`fractions.Fraction`; floating-point values are plain
Python floats (IEEE 754 binary64).  Every directed operation is defined as
"compute the exact rational result, then round", which is bit-identical to
hardware arithmetic under the corresponding rounding mode but needs no global
FPU state.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

Rational = Fraction
Number = Union[int, float, Fraction]

INF = math.inf
MAX_FLOAT = 1.7976931348623157e308


class IndeterminateForm(ArithmeticError):
    """Raised for inf - inf or 0 * inf; indicates a logic error upstream."""


def parse_rational(text: str) -> Fraction:
    """Parse ``-3``, ``1/3`` or ``0.125`` exactly.  Infinity is rejected."""
    s = text.strip()
    if not s:
        raise ValueError("empty rational literal")
    if "/" in s:
        num, _, den = s.partition("/")
        if not den.strip().isdigit():
            raise ValueError(f"bad rational literal {text!r}")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
    try:
        value = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad rational literal {text!r}") from exc
    return value


def parse_bound(text: str) -> Union[Fraction, float]:
    s = text.strip().lower()
    if s in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    if s in ("-inf", "-infinity"):
        return -INF
    return parse_rational(text)


def format_rational(x: Number) -> str:
    if isinstance(x, float):
        if x == INF:
            return "inf"
        if x == -INF:
            return "-inf"
        x = Fraction(x)
    return str(Fraction(x))


def is_finite(x: Number) -> bool:
    return not (isinstance(x, float) and math.isinf(x))


def to_fraction(x: Number) -> Fraction:
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"{x} has no rational value")
    return Fraction(x)


def is_representable(x: Number) -> bool:
    """True iff ``x`` is exactly a finite binary64 value."""
    if isinstance(x, float):
        return math.isfinite(x)
    x = Fraction(x)
    try:
        f = x.numerator / x.denominator
    except OverflowError:
        return False
    return math.isfinite(f) and Fraction(f) == x


def _nearest(x: Fraction) -> float:
    # int / int true division is correctly rounded to nearest
    try:
        return x.numerator / x.denominator
    except OverflowError:
        return INF if x > 0 else -INF


def round_up(x: Number) -> float:
    """Smallest float >= x (+inf if x exceeds the finite range)."""
    if isinstance(x, float):
        if math.isnan(x):
            raise IndeterminateForm("NaN")
        return x
    x = Fraction(x)
    f = _nearest(x)
    if f == INF:
        return INF
    if f == -INF:
        return -MAX_FLOAT
    if Fraction(f) < x:
        f = math.nextafter(f, INF)
    return f


def round_down(x: Number) -> float:
    """Largest float <= x (-inf if x is below the finite range)."""
    if isinstance(x, float):
        if math.isnan(x):
            raise IndeterminateForm("NaN")
        return x
    x = Fraction(x)
    f = _nearest(x)
    if f == -INF:
        return -INF
    if f == INF:
        return MAX_FLOAT
    if Fraction(f) > x:
        f = math.nextafter(f, -INF)
    return f


def _exact_sum(a: Number, b: Number):
    a_inf = isinstance(a, float) and math.isinf(a)
    b_inf = isinstance(b, float) and math.isinf(b)
    if a_inf or b_inf:
        if a_inf and b_inf and a != b:
            raise IndeterminateForm("inf - inf")
        return a if a_inf else b
    return Fraction(a) + Fraction(b)


def _exact_product(a: Number, b: Number):
    a_inf = isinstance(a, float) and math.isinf(a)
    b_inf = isinstance(b, float) and math.isinf(b)
    if a_inf or b_inf:
        if a == 0 or b == 0:
            raise IndeterminateForm("0 * inf")
        return INF if (a > 0) == (b > 0) else -INF
    return Fraction(a) * Fraction(b)


def _check_float(*values: float) -> None:
    for v in values:
        if not isinstance(v, float):
            raise TypeError(f"expected float, got {type(v).__name__}")
        if math.isnan(v):
            raise IndeterminateForm("NaN operand")


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def safe_add_up(a: float, b: float) -> float:
    _check_float(a, b)
    if math.isfinite(a) and math.isfinite(b):
        s, err = _two_sum(a, b)
        if math.isfinite(s) and math.isfinite(err):
            # TwoSum gives the exact rounding error when nothing overflows
            return math.nextafter(s, INF) if err > 0 else s
    return round_up(_exact_sum(a, b))


def safe_add_down(a: float, b: float) -> float:
    _check_float(a, b)
    if math.isfinite(a) and math.isfinite(b):
        s, err = _two_sum(a, b)
        if math.isfinite(s) and math.isfinite(err):
            return math.nextafter(s, -INF) if err < 0 else s
    return round_down(_exact_sum(a, b))


def safe_mul_up(a: float, b: float) -> float:
    _check_float(a, b)
    return round_up(_exact_product(a, b))


def safe_mul_down(a: float, b: float) -> float:
    _check_float(a, b)
    return round_down(_exact_product(a, b))


def safe_sum_up(terms: Iterable[float]) -> float:
    """Right-to-left pairwise sum, rounding up after every addition."""
    terms = list(terms)
    if not terms:
        return 0.0
    acc = terms[-1]
    _check_float(acc)
    for t in reversed(terms[:-1]):
        acc = safe_add_up(t, acc)
    return acc


def safe_sum_down(terms: Iterable[float]) -> float:
    terms = list(terms)
    if not terms:
        return 0.0
    acc = terms[-1]
    _check_float(acc)
    for t in reversed(terms[:-1]):
        acc = safe_add_down(t, acc)
    return acc


# Mixed-operand helpers: one side may be an exact rational (e.g. a variable
# bound that is not representable).  Same semantics, exact then round.

def mul_up(a: Number, b: Number) -> float:
    return round_up(_exact_product(a, b))


def mul_down(a: Number, b: Number) -> float:
    return round_down(_exact_product(a, b))


def sub_up(a: Number, b: Number) -> float:
    return round_up(_exact_sum(a, -b))


def sub_down(a: Number, b: Number) -> float:
    return round_down(_exact_sum(a, -b))


def floor_fraction(x: Number) -> int:
    return math.floor(Fraction(x))


def ceil_fraction(x: Number) -> int:
    return math.ceil(Fraction(x))
