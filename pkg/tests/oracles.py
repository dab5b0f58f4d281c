"""Independent validity oracles shared by the tests."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Dict, Iterable, Tuple

from exactcuts.problem import Problem, feasible_grid, satisfies_row
from exactcuts.simplex import INFEASIBLE, OPTIMAL, LpRelaxation, solve_exact


def grid_denominator(problem: Problem) -> int:
    return 1 if all(v.is_integer for v in problem.variables) else 2


def violated_points(problem: Problem, cuts: Iterable[Tuple[Dict[int, Fraction], Fraction]], g: int = None) -> int:
    """Number of (cut, grid point) pairs where a feasible point violates a cut."""
    g = g or grid_denominator(problem)
    pts = feasible_grid(problem, g)
    bad = 0
    for coefs, rhs in cuts:
        bad += int((~satisfies_row(pts, g, coefs, "<=", rhs)).sum())
    return bad


def max_over_mixed_set(problem: Problem, coefs: Dict[int, Fraction], cap: int = 20000):
    """Exact max of ``coefs x`` over P: enumerate integer parts, exact LP on the rest.

    Returns ``None`` when P is empty.
    """
    bounds = problem.bounds()
    ints = problem.integer_indices
    conts = [j for j in range(problem.n) if j not in ints]
    ranges = [range(math.ceil(bounds[j][0]), math.floor(bounds[j][1]) + 1) for j in ints]
    if math.prod(len(r) for r in ranges) > cap:
        raise ValueError("too many integer assignments")
    pos = {j: k for k, j in enumerate(conts)}
    best = None
    for assign in itertools.product(*ranges):
        fixed = dict(zip(ints, (Fraction(v) for v in assign)))
        rows = []
        for r in problem.le_rows():
            rest = r.rhs - sum(c * fixed[j] for j, c in r.coefs.items() if j in fixed)
            rows.append(({pos[j]: c for j, c in r.coefs.items() if j in pos}, rest))
        const = sum(c * fixed[j] for j, c in coefs.items() if j in fixed)
        obj = {pos[j]: -c for j, c in coefs.items() if j in pos}
        if not conts:
            if all(rhs >= 0 for _, rhs in rows):
                best = const if best is None else max(best, const)
            continue
        lp = LpRelaxation(len(conts), [bounds[j] for j in conts], rows, obj)
        res = solve_exact(lp)
        if res.status == INFEASIBLE:
            continue
        assert res.status == OPTIMAL
        value = const - res.objective_value
        best = value if best is None else max(best, value)
    return best


def cut_is_valid(problem: Problem, coefs: Dict[int, Fraction], rhs: Fraction) -> bool:
    best = max_over_mixed_set(problem, coefs)
    return best is None or best <= rhs


def lp_of(problem: Problem) -> LpRelaxation:
    return LpRelaxation(problem.n, problem.bounds(), [(r.coefs, r.rhs) for r in problem.le_rows()], dict(problem.objective))
