"""Cut scaling and denominator limiting.

Both operate on an exact rational cut ``coefs x <= rhs`` and only ever move
a coefficient by some ``delta`` while paying ``delta * bound`` on the rhs
(upper bound when ``delta > 0``, lower bound otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from ..rational_core import is_finite, is_representable, round_down, round_up
from .contfrac import AT_LEAST, AT_MOST, TWO_SIDED, best_approx
from .representable import bound_correction
from .rows import UPPER, AssumptionViolated, CutAbandoned


@dataclass
class ScaleResult:
    coefs: Dict[int, Fraction]
    rhs: Fraction
    factor: Fraction
    integral: bool = False
    unrounded_rhs: Optional[Fraction] = None


def _power_of_two_factor(coefs: Mapping[int, Fraction]) -> Fraction:
    biggest = max(abs(Fraction(c)) for c in coefs.values())
    k = -round(math.log2(biggest))
    return Fraction(2) ** k


def safe_scale(coefs: Mapping[int, Fraction], rhs: Fraction, factor: Fraction, bounds, sides: Mapping[int, str]):
    """Scale by ``factor >= 0`` keeping every coefficient representable."""
    out = {}
    correction = Fraction(0)
    for j in sorted(coefs):
        t = factor * Fraction(coefs[j])
        if is_representable(t):
            out[j] = t
            continue
        up, down = Fraction(round_up(t)), Fraction(round_down(t))
        lo_b, up_b = bounds[j]
        if sides.get(j) == UPPER:
            if not is_finite(up_b):
                raise AssumptionViolated(f"variable {j} has no finite upper bound")
            out[j] = up
            if up_b > 0:
                correction += (up - down) * Fraction(up_b)
        else:
            if not is_finite(lo_b):
                raise AssumptionViolated(f"variable {j} has no finite lower bound")
            out[j] = down
            if lo_b < 0:
                correction += (down - up) * Fraction(lo_b)
    new_rhs = round_up(factor * Fraction(rhs) + correction)
    if not math.isfinite(new_rhs):
        raise CutAbandoned("scaled rhs is not finite")
    return {j: c for j, c in out.items() if c != 0}, Fraction(new_rhs)


def _integral_scaling(coefs, rhs, bounds, scm_limit: int, max_error: float) -> Optional[ScaleResult]:
    scm = 1
    for c in coefs.values():
        approx = best_approx(Fraction(c), scm_limit, TWO_SIDED)
        if abs(approx - Fraction(c)) > Fraction(max_error):
            return None
        scm = scm * approx.denominator // math.gcd(scm, approx.denominator)
        if scm > scm_limit:
            return None
    factor = Fraction(scm)
    out = {}
    correction = Fraction(0)
    for j in sorted(coefs):
        t = factor * Fraction(coefs[j])
        n = math.floor(t + Fraction(1, 2))
        try:
            correction += bound_correction(n - t, j, bounds)
        except AssumptionViolated:
            return None
        if n:
            out[j] = Fraction(n)
    if not out:
        return None
    unrounded = factor * Fraction(rhs) + correction
    return ScaleResult(out, Fraction(math.floor(unrounded)), factor, True, unrounded)


def scale_cut(
    coefs: Mapping[int, Fraction],
    rhs: Fraction,
    integrality: Mapping[int, bool],
    bounds,
    sides: Mapping[int, str],
    scm_limit: int = 10 ** 5,
    max_error: float = 1e-6,
) -> ScaleResult:
    """Scale to integral coefficients if possible, else to equilibrium."""
    coefs = {j: Fraction(c) for j, c in coefs.items() if c != 0}
    if not coefs:
        return ScaleResult(coefs, Fraction(rhs), Fraction(1))
    if all(integrality[j] for j in coefs):
        res = _integral_scaling(coefs, rhs, bounds, scm_limit, max_error)
        if res is not None:
            return res
    factor = _power_of_two_factor(coefs)
    try:
        new_coefs, new_rhs = safe_scale(coefs, rhs, factor, bounds, sides)
    except CutAbandoned:
        return ScaleResult(coefs, Fraction(rhs), Fraction(1))
    if not new_coefs:
        return ScaleResult(coefs, Fraction(rhs), Fraction(1))
    return ScaleResult(new_coefs, new_rhs, factor)


def limit_denominators(coefs: Mapping[int, Fraction], rhs: Fraction, max_denominator: int, bounds) -> Tuple[Dict[int, Fraction], Fraction]:
    """Relax the cut so that every denominator is at most ``max_denominator``."""
    out = {}
    correction = Fraction(0)
    for j in sorted(coefs):
        a = Fraction(coefs[j])
        if a.denominator <= max_denominator:
            out[j] = a
            continue
        lo, up = bounds[j]
        if is_finite(lo) and is_finite(up):
            direction = TWO_SIDED
        elif is_finite(lo):
            direction = AT_MOST
        elif is_finite(up):
            direction = AT_LEAST
        else:
            raise AssumptionViolated(f"variable {j} has no finite bound")
        approx = best_approx(a, max_denominator, direction)
        correction += bound_correction(approx - a, j, bounds)
        if approx:
            out[j] = approx
    new_rhs = best_approx(Fraction(rhs) + correction, max_denominator, AT_LEAST)
    return out, new_rhs
