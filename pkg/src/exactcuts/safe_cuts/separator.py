"""Safe Gomory mixed-integer cut separation from an approximate LP basis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Mapping, Optional, Sequence

from ..simplex import OPTIMAL, LpRelaxation, LpResult, basis_inverse_row
from .mir import exact_slack_corrections, safe_mir, substitute_slacks
from .postprocess import limit_denominators, scale_cut
from .representable import choose_bound_sides, clean_small_coefficients, make_representable, safe_aggregate
from .rows import AggregationRecord, CutAbandoned, Cut, FRow, NoCut


@dataclass
class SeparatorConfig:
    f_min: float = 0.01
    max_cuts_per_round: int = 10
    rounds: int = 5
    # 0 disables denominator limiting
    max_denominator: int = 2 ** 17
    parallelism: float = 0.999
    min_efficacy: float = 1e-6
    scm_limit: int = 10 ** 5
    scaling_error: float = 1e-6
    multiplier_tol: float = 1e-12
    coef_tol: float = 1e-9


def _is_integral_row(frow: FRow, integrality: Sequence[bool]) -> bool:
    if not float(frow.rhs).is_integer():
        return False
    return all(integrality[j] and float(a).is_integer() for j, a in frow.coefs.items())


def relax_rows(lp: LpRelaxation, sides: Mapping[int, str]) -> List[Optional[FRow]]:
    """Representable relaxation of every LP row, ``None`` where impossible."""
    out: List[Optional[FRow]] = []
    for coefs, rhs in lp.rows:
        try:
            out.append(make_representable(coefs, rhs, lp.bounds, sides))
        except CutAbandoned:
            out.append(None)
    return out


def efficacy(coefs: Mapping[int, Fraction], rhs: Fraction, point: Sequence[float]) -> float:
    norm = math.sqrt(sum(float(c) ** 2 for c in coefs.values()))
    if norm == 0:
        return 0.0
    act = sum(float(c) * float(point[j]) for j, c in coefs.items())
    return (act - float(rhs)) / norm


def _fractionality(v: float) -> float:
    return min(v - math.floor(v), math.ceil(v) - v)


def gmi_from_row(
    lp: LpRelaxation,
    frows: Sequence[Optional[FRow]],
    multipliers: Sequence[float],
    integrality: Sequence[bool],
    sides: Mapping[int, str],
    point: Sequence[float],
    config: SeparatorConfig,
) -> Optional[Cut]:
    """Run the safe pipeline on one aggregation; ``None`` if no cut results."""
    bounds = lp.bounds
    mults = [0.0 if abs(lam) < config.multiplier_tol else float(lam) for lam in multipliers]
    if not any(mults):
        return None
    rows = []
    slack_integral = []
    for r, lam in enumerate(mults):
        fr = frows[r]
        if fr is None:
            if lam != 0:
                return None
            rows.append(({}, 0.0))
            slack_integral.append(False)
            continue
        rows.append((fr.coefs, fr.rhs))
        slack_integral.append(_is_integral_row(fr, integrality))
    try:
        base = safe_aggregate(rows, mults, bounds, sides, slack_integral)
        base = clean_small_coefficients(base, bounds, config.coef_tol)
        struct, slack, rhs, data = safe_mir(base, integrality, bounds, sides, config.f_min)
        slack_rows = {r: (frows[r].coefs, frows[r].rhs) for r in base.slack_terms}
        sub = substitute_slacks(struct, slack, rhs, slack_rows, bounds, sides)
    except (CutAbandoned, NoCut):
        return None
    coefs = {j: Fraction(a) for j, a in sub.coefs.items()}
    if not coefs:
        return None
    try:
        scaled = scale_cut(coefs, Fraction(sub.rhs), integrality, bounds, sides, config.scm_limit, config.scaling_error)
        final_coefs, final_rhs = scaled.coefs, scaled.rhs
        limited = False
        if config.max_denominator:
            final_coefs, final_rhs = limit_denominators(final_coefs, final_rhs, config.max_denominator, bounds)
            limited = final_coefs != scaled.coefs or final_rhs != scaled.rhs
    except CutAbandoned:
        return None
    if not final_coefs:
        return None
    used = {r: lam for r, lam in enumerate(mults) if lam != 0}
    record = AggregationRecord(multipliers=used, exact_slack_corrections=exact_slack_corrections(data))
    return Cut(
        coefs=final_coefs,
        rhs=final_rhs,
        mir=data,
        base=base,
        aggregation=record,
        slack_rows=slack_rows,
        scaling_factor=scaled.factor,
        integral_scaled=scaled.integral,
        unrounded_rhs=scaled.unrounded_rhs,
        denominator_limited=limited,
        efficacy=efficacy(final_coefs, final_rhs, point),
    )


def _parallel(a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> float:
    na = math.sqrt(sum(float(c) ** 2 for c in a.values()))
    nb = math.sqrt(sum(float(c) ** 2 for c in b.values()))
    dot = sum(float(c) * float(b[j]) for j, c in a.items() if j in b)
    return dot / (na * nb)


def select_cuts(cuts: List[Cut], config: SeparatorConfig) -> List[Cut]:
    """Greedy by efficacy, skipping near-parallel cuts."""
    ranked = sorted(cuts, key=lambda c: (-c.efficacy, c.source_var))
    chosen: List[Cut] = []
    for cut in ranked:
        if len(chosen) >= config.max_cuts_per_round:
            break
        if any(_parallel(cut.coefs, other.coefs) > config.parallelism for other in chosen):
            continue
        chosen.append(cut)
    return chosen


def separate_gmi(
    integrality: Sequence[bool],
    lp: LpRelaxation,
    lp_result: LpResult,
    config: Optional[SeparatorConfig] = None,
) -> List[Cut]:
    """Safe GMI cuts from the tableau rows of fractional basic integer variables.

    ``lp`` holds the exact rows and global bounds; ``lp_result`` is an
    approximate solve of the same LP.  Every returned cut is valid for all
    integer-feasible points of ``lp``.
    """
    config = config or SeparatorConfig()
    if lp_result.status != OPTIMAL:
        return []
    point = [float(v) for v in lp_result.primal]
    sides = choose_bound_sides(range(lp.n), lp.bounds, point)
    frows = relax_rows(lp, sides)
    candidates: List[Cut] = []
    for pos, (kind, j) in enumerate(lp_result.basis):
        if kind != "x" or not integrality[j]:
            continue
        if _fractionality(point[j]) < config.f_min:
            continue
        lam = basis_inverse_row(lp, lp_result.basis, pos)
        if lam is None:
            continue
        cut = gmi_from_row(lp, frows, lam, integrality, sides, point, config)
        if cut is None or not cut.efficacy > config.min_efficacy:
            continue
        cut.source_var = j
        candidates.append(cut)
    return select_cuts(candidates, config)
