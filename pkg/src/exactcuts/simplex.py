"""Bounded-variable primal simplex, generic over exact and binary64 scalars.

Rows are ``a x <= b``; each gets a slack ``s >= 0`` so that ``a x + s = b``.
Rows whose starting residual is negative get an artificial variable for
phase 1.  Pricing and the ratio test both use Bland's smallest-index rule.

Dual values follow the usual minimisation convention: ``y_i <= 0`` for every
row and reduced costs ``d_j`` on structural columns, such that
``c = sum_i y_i a_i + d`` exactly (in exact mode).  A positive ``d_j`` pairs
with the lower bound of ``x_j``, a negative one with the upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .rational_core import INF, is_finite

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"


@dataclass
class LpRelaxation:
    n: int
    bounds: List[Tuple[object, object]]
    rows: List[Tuple[Dict[int, Fraction], Fraction]]
    objective: Dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.bounds) != self.n:
            raise ValueError("one bound pair per variable required")

    def with_rows(self, extra) -> "LpRelaxation":
        return LpRelaxation(self.n, list(self.bounds), list(self.rows) + list(extra), dict(self.objective))

    def with_bounds(self, bounds) -> "LpRelaxation":
        return LpRelaxation(self.n, list(bounds), list(self.rows), dict(self.objective))


@dataclass
class LpResult:
    status: str
    primal: List = field(default_factory=list)
    row_duals: List = field(default_factory=list)
    reduced_costs: List = field(default_factory=list)
    basis: List[Tuple[str, int]] = field(default_factory=list)
    objective_value: object = None
    iterations: int = 0
    # set when some variable has lower bound > upper bound
    empty_box: Optional[int] = None

    @property
    def dual(self):
        return self.row_duals, self.reduced_costs


class _Kind:
    def __init__(self, exact: bool, tol: float = 1e-9):
        self.exact = exact
        self.tol = 0 if exact else tol
        self.zero = Fraction(0) if exact else 0.0
        self.one = Fraction(1) if exact else 1.0

    def conv(self, x):
        if not is_finite(x):
            return x
        return Fraction(x) if self.exact else float(x)


class _Tableau:
    """Dense tableau ``B^-1 [A | I | -E]`` with explicit variable values."""

    def __init__(self, lp: LpRelaxation, kind: _Kind):
        self.kind = kind
        n, m = lp.n, len(lp.rows)
        self.n, self.m = n, m
        conv = kind.conv
        lo = [conv(b[0]) for b in lp.bounds] + [kind.zero] * m
        up = [conv(b[1]) for b in lp.bounds] + [INF] * m
        for j in range(n):
            if is_finite(lo[j]) and is_finite(up[j]) and lo[j] > up[j]:
                raise _EmptyBox(j)
        x = []
        for j in range(n):
            if is_finite(lo[j]):
                x.append(lo[j])
            elif is_finite(up[j]):
                x.append(up[j])
            else:
                x.append(kind.zero)
        a = [[kind.zero] * n for _ in range(m)]
        b = []
        for i, (coefs, rhs) in enumerate(lp.rows):
            for j, c in coefs.items():
                a[i][j] = conv(c)
            b.append(conv(rhs))
        resid = [b[i] - sum((a[i][j] * x[j] for j in range(n) if a[i][j] != 0), kind.zero) for i in range(m)]
        art_rows = [i for i in range(m) if resid[i] < 0]
        self.art_rows = art_rows
        k = len(art_rows)
        ncol = n + m + k
        self.ncol = ncol
        self.art_start = n + m
        lo += [kind.zero] * k
        up += [INF] * k
        x += [kind.zero] * (m + k)
        rows = []
        basis = []
        art_of = {i: n + m + t for t, i in enumerate(art_rows)}
        for i in range(m):
            row = a[i] + [kind.zero] * (m + k)
            row[n + i] = kind.one
            if i in art_of:
                row[art_of[i]] = -kind.one
                row = [-v for v in row]
                basis.append(art_of[i])
                x[art_of[i]] = -resid[i]
            else:
                basis.append(n + i)
                x[n + i] = resid[i]
            rows.append(row)
        self.rows = rows
        self.basis = basis
        self.lo, self.up, self.x = lo, up, x
        self.objective = [kind.conv(lp.objective.get(j, 0)) for j in range(n)] + [kind.zero] * (m + k)
        self.iterations = 0

    # -- pricing ---------------------------------------------------------
    def reduced_costs(self, cost) -> List:
        z = self.kind.zero
        d = list(cost)
        for r, bcol in enumerate(self.basis):
            cb = cost[bcol]
            if cb != 0:
                row = self.rows[r]
                for j in range(self.ncol):
                    if row[j] != 0:
                        d[j] -= cb * row[j]
        for bcol in self.basis:
            d[bcol] = z
        return d

    def run(self, cost, max_iter: int, allow_art: bool) -> str:
        kind = self.kind
        tol = kind.tol
        d = self.reduced_costs(cost)
        is_basic = [False] * self.ncol
        for bcol in self.basis:
            is_basic[bcol] = True
        while True:
            entering, direction = -1, 0
            for j in range(self.ncol):
                if is_basic[j] or (not allow_art and j >= self.art_start):
                    continue
                if d[j] < -tol and (not is_finite(self.up[j]) or self.x[j] < self.up[j] - tol):
                    entering, direction = j, 1
                    break
                if d[j] > tol and (not is_finite(self.lo[j]) or self.x[j] > self.lo[j] + tol):
                    entering, direction = j, -1
                    break
            if entering < 0:
                self.d = d
                return OPTIMAL
            if self.iterations >= max_iter:
                self.d = d
                return ITERATION_LIMIT
            self.iterations += 1
            step, leave_row, leave_to_upper = self._ratio(entering, direction)
            if step is None:
                self.d = d
                return UNBOUNDED
            self.x[entering] += direction * step
            for r, bcol in enumerate(self.basis):
                alpha = self.rows[r][entering]
                if alpha != 0:
                    self.x[bcol] -= alpha * direction * step
            if leave_row < 0:
                continue  # bound flip
            leaving = self.basis[leave_row]
            self.x[leaving] = self.up[leaving] if leave_to_upper else self.lo[leaving]
            self._pivot(leave_row, entering, d)
            is_basic[leaving] = False
            is_basic[entering] = True

    def _ratio(self, e: int, direction: int):
        tol = self.kind.tol
        best = None
        best_row, best_upper, best_key = -1, False, None
        if is_finite(self.lo[e]) and is_finite(self.up[e]):
            best = self.up[e] - self.lo[e]
            best_key = e
        for r, bcol in enumerate(self.basis):
            alpha = self.rows[r][e]
            if -tol <= alpha <= tol:
                continue
            rate = -alpha * direction
            if rate < 0:
                if not is_finite(self.lo[bcol]):
                    continue
                t = (self.x[bcol] - self.lo[bcol]) / -rate
                upper = False
            else:
                if not is_finite(self.up[bcol]):
                    continue
                t = (self.up[bcol] - self.x[bcol]) / rate
                upper = True
            if t < 0:
                t = self.kind.zero
            if best is None or t < best - tol or (t <= best + tol and bcol < best_key):
                best, best_row, best_upper, best_key = t, r, upper, bcol
        if best is None:
            return None, -1, False
        return best, best_row, best_upper

    def _pivot(self, r: int, e: int, d: List) -> None:
        rows = self.rows
        prow = rows[r]
        piv = prow[e]
        prow = [v / piv for v in prow]
        rows[r] = prow
        nz = [j for j in range(self.ncol) if prow[j] != 0]
        for i in range(self.m):
            if i == r:
                continue
            row = rows[i]
            f = row[e]
            if f != 0:
                for j in nz:
                    row[j] -= f * prow[j]
                row[e] = self.kind.zero
        f = d[e]
        if f != 0:
            for j in nz:
                d[j] -= f * prow[j]
            d[e] = self.kind.zero
        self.basis[r] = e

    def duals(self, cost) -> List:
        """``y = c_B B^-1``, read off the slack columns."""
        y = [self.kind.zero] * self.m
        for r, bcol in enumerate(self.basis):
            cb = cost[bcol]
            if cb != 0:
                row = self.rows[r]
                for i in range(self.m):
                    y[i] += cb * row[self.n + i]
        return y


class _EmptyBox(Exception):
    def __init__(self, j):
        self.j = j


def _basis_ids(tab: _Tableau) -> List[Tuple[str, int]]:
    out = []
    for bcol in tab.basis:
        if bcol < tab.n:
            out.append(("x", bcol))
        elif bcol < tab.art_start:
            out.append(("s", bcol - tab.n))
        else:
            out.append(("a", tab.art_rows[bcol - tab.art_start]))
    return out


def _structural_reduced_costs(lp: LpRelaxation, y, kind: _Kind):
    d = [kind.conv(lp.objective.get(j, 0)) for j in range(lp.n)]
    for i, (coefs, _) in enumerate(lp.rows):
        if y[i] != 0:
            for j, c in coefs.items():
                d[j] -= y[i] * kind.conv(c)
    return d


def _solve(lp: LpRelaxation, kind: _Kind, max_iter: int) -> LpResult:
    try:
        tab = _Tableau(lp, kind)
    except _EmptyBox as exc:
        return LpResult(INFEASIBLE, empty_box=exc.j)
    art_cost = [kind.zero] * tab.ncol
    for j in range(tab.art_start, tab.ncol):
        art_cost[j] = kind.one
    if tab.ncol > tab.art_start:
        status = tab.run(art_cost, max_iter, allow_art=True)
        if status != OPTIMAL:
            # phase 1 is bounded below by zero, so only the limit can stop it
            return LpResult(ITERATION_LIMIT, iterations=tab.iterations)
        infeas = sum((tab.x[j] for j in range(tab.art_start, tab.ncol)), kind.zero)
        if infeas > (kind.tol * 10 if not kind.exact else 0):
            y = tab.duals(art_cost)
            d = _structural_reduced_costs(LpRelaxation(lp.n, lp.bounds, lp.rows, {}), y, kind)
            return LpResult(INFEASIBLE, row_duals=y, reduced_costs=d, basis=_basis_ids(tab),
                            objective_value=infeas, iterations=tab.iterations)
        for j in range(tab.art_start, tab.ncol):
            tab.up[j] = kind.zero
            tab.x[j] = kind.zero
    status = tab.run(tab.objective, max_iter, allow_art=False)
    if status != OPTIMAL:
        return LpResult(status, iterations=tab.iterations)
    y = tab.duals(tab.objective)
    d = _structural_reduced_costs(lp, y, kind)
    primal = tab.x[: lp.n]
    obj = sum((kind.conv(c) * primal[j] for j, c in lp.objective.items()), kind.zero)
    return LpResult(OPTIMAL, primal=primal, row_duals=y, reduced_costs=d, basis=_basis_ids(tab),
                    objective_value=obj, iterations=tab.iterations)


def solve_exact(lp: LpRelaxation, max_iter: int = 100000) -> LpResult:
    return _solve(lp, _Kind(True), max_iter)


def solve_float(lp: LpRelaxation, max_iter: int = 100000, tol: float = 1e-9) -> LpResult:
    try:
        return _solve(lp, _Kind(False, tol), max_iter)
    except (ZeroDivisionError, OverflowError, ValueError):
        return LpResult(ITERATION_LIMIT)


def basis_matrix(lp: LpRelaxation, basis: Sequence[Tuple[str, int]]) -> np.ndarray:
    m = len(lp.rows)
    mat = np.zeros((m, len(basis)))
    for col, (kind, idx) in enumerate(basis):
        if kind == "x":
            for i, (coefs, _) in enumerate(lp.rows):
                c = coefs.get(idx)
                if c:
                    mat[i, col] = float(c)
        elif kind == "s":
            mat[idx, col] = 1.0
        else:
            mat[idx, col] = -1.0
    return mat


def basis_inverse_row(lp: LpRelaxation, basis: Sequence[Tuple[str, int]], i: int) -> Optional[List[float]]:
    """Row ``i`` of ``B^-1`` via LU with partial pivoting on ``B^T y = e_i``.

    Returns ``None`` when the basis is numerically singular.
    """
    mat = basis_matrix(lp, basis)
    e = np.zeros(len(basis))
    e[i] = 1.0
    try:
        y = np.linalg.solve(mat.T, e)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(y)):
        return None
    if np.linalg.cond(mat) > 1e12:
        return None
    return [float(v) for v in y]


def certified_bound(lp: LpRelaxation, result: LpResult):
    """Recompute the dual bound ``y^T b + sum d_j (bound)`` exactly."""
    total = Fraction(0)
    if result.empty_box is not None:
        raise ValueError("empty box has no dual bound")
    for i, (_, rhs) in enumerate(lp.rows):
        total += Fraction(result.row_duals[i]) * Fraction(rhs)
    for j, dj in enumerate(result.reduced_costs):
        if dj > 0:
            total += Fraction(dj) * Fraction(lp.bounds[j][0])
        elif dj < 0:
            total += Fraction(dj) * Fraction(lp.bounds[j][1])
    return total
