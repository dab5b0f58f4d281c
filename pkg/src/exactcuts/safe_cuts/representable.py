"""Representable relaxations of rows and safe aggregation."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..rational_core import (
    is_finite,
    is_representable,
    mul_down,
    mul_up,
    round_down,
    round_up,
    safe_sum_down,
    safe_sum_up,
    sub_up,
)
from .rows import LOWER, UPPER, AssumptionViolated, CutAbandoned, FRow


def choose_bound_sides(support: Iterable[int], bounds, lp_point=None) -> Dict[int, str]:
    """Pick the bound used to shift each variable; the closer one wins, ties go to L."""
    sides = {}
    for j in support:
        lo, up = bounds[j]
        has_lo, has_up = is_finite(lo), is_finite(up)
        if has_lo and has_up:
            if lp_point is None:
                sides[j] = LOWER
            else:
                v = float(lp_point[j])
                sides[j] = UPPER if float(up) - v < v - float(lo) else LOWER
        elif has_lo:
            sides[j] = LOWER
        elif has_up:
            sides[j] = UPPER
    return sides


def _finite_or_abandon(value: float) -> float:
    if not math.isfinite(value):
        raise CutAbandoned("value left the finite range")
    return value


def bound_correction(delta: Fraction, j: int, bounds) -> Fraction:
    """Exact rhs increase that pays for adding ``delta`` to the coefficient of ``x_j``."""
    if delta == 0:
        return Fraction(0)
    lo, up = bounds[j]
    if delta > 0:
        if not is_finite(up):
            raise AssumptionViolated(f"variable {j} needs a finite upper bound")
        return delta * Fraction(up)
    if not is_finite(lo):
        raise AssumptionViolated(f"variable {j} needs a finite lower bound")
    return delta * Fraction(lo)


def make_representable(coefs: Mapping[int, Fraction], rhs: Fraction, bounds, sides: Mapping[int, str]) -> FRow:
    """Relax a rational row into one whose coefficients and rhs are floats."""
    out: Dict[int, float] = {}
    used_sides: Dict[int, str] = {}
    correction = Fraction(0)
    for j in sorted(coefs):
        a = Fraction(coefs[j])
        if a == 0:
            continue
        if is_representable(a):
            out[j] = float(a)
            continue
        side = sides.get(j)
        if side is None:
            raise AssumptionViolated(f"variable {j} has no usable bound")
        up, down = round_up(a), round_down(a)
        _finite_or_abandon(up)
        _finite_or_abandon(down)
        lo_b, up_b = bounds[j]
        if side == UPPER:
            if not is_finite(up_b):
                raise AssumptionViolated(f"variable {j} has no finite upper bound")
            out[j] = up
            if up_b > 0:
                correction += (Fraction(up) - Fraction(down)) * Fraction(up_b)
        else:
            if not is_finite(lo_b):
                raise AssumptionViolated(f"variable {j} has no finite lower bound")
            out[j] = down
            if lo_b < 0:
                correction += (Fraction(down) - Fraction(up)) * Fraction(lo_b)
        used_sides[j] = side
    new_rhs = _finite_or_abandon(round_up(Fraction(rhs) + correction))
    return FRow(out, new_rhs, used_sides)


def combine_rows(
    rows: Sequence[Tuple[Mapping[int, float], float]],
    multipliers: Sequence[float],
    bounds,
    sides: Mapping[int, str],
) -> FRow:
    """Directed-rounding evaluation of ``sum_k mult_k row_k``.

    Signs of the multipliers are not checked: callers either aggregate
    inequalities with nonnegative weights or substitute exact identities.
    """
    if len(rows) != len(multipliers):
        raise ValueError("one multiplier per row required")
    used = [(k, float(lam)) for k, lam in enumerate(multipliers) if lam != 0]
    for _, lam in used:
        if not math.isfinite(lam):
            raise CutAbandoned("non-finite multiplier")
    support = sorted({j for k, _ in used for j in rows[k][0]})
    coefs: Dict[int, float] = {}
    corrections: List[float] = []
    for j in support:
        terms = [(lam, rows[k][0][j]) for k, lam in used if rows[k][0].get(j, 0) != 0]
        hi = _finite_or_abandon(safe_sum_up([mul_up(lam, a) for lam, a in terms]))
        lo = _finite_or_abandon(safe_sum_down([mul_down(lam, a) for lam, a in terms]))
        if hi == lo:
            if hi != 0:
                coefs[j] = hi
            continue
        side = sides.get(j)
        if side is None:
            raise AssumptionViolated(f"variable {j} has no usable bound")
        lo_b, up_b = bounds[j]
        if side == UPPER:
            if not is_finite(up_b):
                raise AssumptionViolated(f"variable {j} has no finite upper bound")
            coefs[j] = hi
            if up_b > 0:
                corrections.append(mul_up(sub_up(hi, lo), up_b))
        else:
            if not is_finite(lo_b):
                raise AssumptionViolated(f"variable {j} has no finite lower bound")
            coefs[j] = lo
            if lo_b < 0:
                corrections.append(mul_up(sub_up(hi, lo), -lo_b))
    coefs = {j: c for j, c in coefs.items() if c != 0}
    rhs_terms = [mul_up(lam, rows[k][1]) for k, lam in used] + corrections
    rhs = _finite_or_abandon(safe_sum_up(rhs_terms))
    return FRow(coefs, rhs, {j: sides[j] for j in coefs if j in sides})


def safe_aggregate(
    rows: Sequence[Tuple[Mapping[int, float], float]],
    multipliers: Sequence[float],
    bounds,
    sides: Mapping[int, str],
    slack_integral: Optional[Sequence[bool]] = None,
    with_slacks: bool = True,
) -> FRow:
    """Safely aggregate representable rows with float multipliers.

    With ``with_slacks`` every row is read as ``a x + s = b, s >= 0`` so the
    multipliers may have any sign; each used row leaves a slack term.
    Without it the rows are plain inequalities and multipliers must be >= 0.
    """
    if not with_slacks and any(lam < 0 for lam in multipliers):
        raise ValueError("negative multiplier needs slack handling")
    frow = combine_rows(rows, multipliers, bounds, sides)
    if with_slacks:
        for k, lam in enumerate(multipliers):
            if lam != 0:
                integral = bool(slack_integral[k]) if slack_integral is not None else False
                frow.slack_terms[k] = (float(lam), integral)
    return frow


def clean_small_coefficients(frow: FRow, bounds, threshold: float = 1e-9) -> FRow:
    """Drop coefficients below ``threshold`` in magnitude, paying with a bound."""
    coefs = dict(frow.coefs)
    extra = Fraction(0)
    for j in sorted(coefs):
        a = coefs[j]
        if abs(a) >= threshold:
            continue
        try:
            extra += bound_correction(-Fraction(a), j, bounds)
        except AssumptionViolated:
            continue
        del coefs[j]
    if extra == 0:
        return FRow(coefs, frow.rhs, dict(frow.sides), dict(frow.slack_terms))
    rhs = _finite_or_abandon(round_up(Fraction(frow.rhs) + extra))
    return FRow(coefs, rhs, dict(frow.sides), dict(frow.slack_terms))
