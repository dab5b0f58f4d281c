"""Safe MIR rounding of a representable base row and slack elimination."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Hashable, Mapping, Tuple

from ..rational_core import is_finite, mul_up, round_down, safe_sum_up
from .representable import combine_rows
from .rows import LOWER, UPPER, AssumptionViolated, CutAbandoned, FRow, MirData, NoCut, ext_sort_key


def _ext_view(frow: FRow, integrality: Mapping[int, bool], bounds, sides: Mapping[int, str]):
    """Coefficients, bounds, sides and integrality over structurals and slacks."""
    coefs: Dict[Hashable, float] = {}
    ext_bounds: Dict[Hashable, Tuple[object, object]] = {}
    ext_sides: Dict[Hashable, str] = {}
    ext_int: Dict[Hashable, bool] = {}
    for j, a in frow.coefs.items():
        side = sides.get(j)
        if side is None:
            raise AssumptionViolated(f"variable {j} has no finite bound")
        lo, up = bounds[j]
        if (side == UPPER and not is_finite(up)) or (side == LOWER and not is_finite(lo)):
            raise AssumptionViolated(f"variable {j} has no finite bound on side {side}")
        if integrality[j] and Fraction(lo if side == LOWER else up).denominator != 1:
            raise AssumptionViolated(f"integer variable {j} needs an integral bound")
        coefs[j] = a
        ext_bounds[j] = (lo, up)
        ext_sides[j] = side
        ext_int[j] = bool(integrality[j])
    for r, (lam, integral) in frow.slack_terms.items():
        key = ("s", r)
        coefs[key] = lam
        ext_bounds[key] = (Fraction(0), math.inf)
        ext_sides[key] = LOWER
        ext_int[key] = bool(integral)
    return coefs, ext_bounds, ext_sides, ext_int


def safe_mir(frow: FRow, integrality: Mapping[int, bool], bounds, sides: Mapping[int, str], f_min: float = 0.01):
    """Apply the MIR formula to ``frow`` with directed rounding.

    Integer variables must have integral bounds on their chosen side.
    Returns ``(structural coefs, slack coefs, rhs, MirData)`` of the cut
    ``coefs x + slack_coefs s <= rhs`` in the original space.
    """
    coefs, ext_bounds, ext_sides, ext_int = _ext_view(frow, integrality, bounds, sides)
    keys = sorted(coefs, key=ext_sort_key)
    transformed: Dict[Hashable, float] = {}
    shift_terms = []
    for v in keys:
        a = coefs[v]
        lo, up = ext_bounds[v]
        if ext_sides[v] == UPPER:
            transformed[v] = -a
            shift_terms.append(mul_up(-a, up))
        else:
            transformed[v] = a
            if lo != 0:
                shift_terms.append(mul_up(-a, lo))
    d = safe_sum_up([frow.rhs] + shift_terms)
    if not math.isfinite(d):
        raise CutAbandoned("transformed rhs is not finite")
    floor_d = math.floor(d)
    f = Fraction(d) - floor_d
    if f < Fraction(f_min) or f > 1 - Fraction(f_min):
        raise NoCut(f"rhs fractionality {float(f):.3g} out of range")
    one_minus_f = 1 - f
    if round_down(one_minus_f) == 0:
        raise CutAbandoned("1 - f underflows")
    f_int: Dict[Hashable, Fraction] = {}
    exact: Dict[Hashable, Fraction] = {}
    safe: Dict[Hashable, float] = {}
    for v in keys:
        a = Fraction(transformed[v])
        if ext_int[v]:
            fl = math.floor(a)
            f_int[v] = a - fl
            gamma = fl + max(f_int[v] - f, Fraction(0)) / one_minus_f
        elif a < 0:
            gamma = a / one_minus_f
        else:
            gamma = Fraction(0)
        exact[v] = gamma
        safe[v] = round_down(gamma)
        if not math.isfinite(safe[v]):
            raise CutAbandoned("cut coefficient is not finite")
    struct: Dict[int, float] = {}
    slack: Dict[int, float] = {}
    rhs_terms = [float(floor_d)]
    for v in keys:
        g = safe[v]
        if g == 0:
            continue
        lo, up = ext_bounds[v]
        if ext_sides[v] == UPPER:
            coef = -g
            rhs_terms.append(mul_up(-g, up))
        else:
            coef = g
            if lo != 0:
                rhs_terms.append(mul_up(g, lo))
        if isinstance(v, tuple):
            slack[v[1]] = coef
        else:
            struct[v] = coef
    rhs = safe_sum_up(rhs_terms)
    if not math.isfinite(rhs):
        raise CutAbandoned("cut rhs is not finite")
    data = MirData(
        d=d,
        floor_d=floor_d,
        f=f,
        f_int=f_int,
        transformed=transformed,
        exact_coefs=exact,
        safe_coefs=safe,
        is_integer=ext_int,
        sides=ext_sides,
        ext_bounds=ext_bounds,
    )
    return struct, slack, rhs, data


def substitute_slacks(
    struct: Mapping[int, float],
    slack: Mapping[int, float],
    rhs: float,
    slack_rows: Mapping[int, Tuple[Mapping[int, float], float]],
    bounds,
    sides: Mapping[int, str],
) -> FRow:
    """Eliminate ``s_r = b_r - a_r x`` from ``struct x + slack s <= rhs``.

    The slack coefficients are already rounded down, so this is a plain
    safe combination of the cut (weight 1) with each row (weight -coef).
    """
    rows = [(dict(struct), rhs)]
    mults = [1.0]
    for r in sorted(slack):
        if slack[r] == 0:
            continue
        rows.append(slack_rows[r])
        mults.append(-slack[r])
    return combine_rows(rows, mults, bounds, sides)


def exact_slack_corrections(data: MirData) -> Dict[int, Fraction]:
    """Exact minus safe slack coefficient, per LP row (all nonnegative)."""
    out = {}
    for v, g in data.exact_coefs.items():
        if isinstance(v, tuple):
            diff = g - Fraction(data.safe_coefs[v])
            if diff:
                out[v[1]] = diff
    return out
