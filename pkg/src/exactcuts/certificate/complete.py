"""Complete weak derivations into ordinary aggregations.

Bounds mode adds the coefficient differences of each weak record as extra
multipliers on variable bound lines.  Exact-LP mode instead maximises the
stated left-hand side over all earlier assumption-free lines and uses the
dual solution as the new aggregation.
"""

from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction
from typing import Dict, FrozenSet, List, Tuple

from ..simplex import INFEASIBLE, OPTIMAL, LpRelaxation, solve_exact
from .vipr import Certificate, Constraint, Derivation, Reason

BOUNDS = "bounds"
EXACT_LP = "exact_lp"


class CompletionError(ValueError):
    def __init__(self, message: str, indices: List[int]):
        super().__init__(f"{message}: derivation(s) {', '.join(str(i) for i in indices)}")
        self.indices = indices


def _aggregate(cert: Certificate, terms) -> Tuple[Dict[int, Fraction], Fraction]:
    coefs: Dict[int, Fraction] = {}
    rhs = Fraction(0)
    for ref, mult in terms:
        line = cert.line(ref)
        for j, c in line.coefs.items():
            coefs[j] = coefs.get(j, Fraction(0)) + mult * c
        rhs += mult * line.rhs
    return {j: c for j, c in coefs.items() if c != 0}, rhs


def _assumption_free(cert: Certificate) -> List[bool]:
    """Which lines hold without assumptions (no verification is done here)."""
    m = len(cert.constraints)
    active: List[FrozenSet[int]] = [frozenset()] * m
    for k, der in enumerate(cert.derivations):
        r = der.reason
        if r.kind == "asm":
            a = frozenset([m + k])
        elif r.kind == "uns":
            i1, a1, i2, a2 = r.unsplit
            a = (active[i1] - {a1}) | (active[i2] - {a2})
        else:
            a = frozenset().union(*(active[ref] for ref, _ in r.terms)) if r.terms else frozenset()
        active.append(a)
    return [not a for a in active]


def _bound_of(line: Constraint):
    """``(variable, coefficient, kind)`` for single-variable lines, kind in {lower, upper, both}."""
    if len(line.coefs) != 1:
        return None
    (j, c), = line.coefs.items()
    if line.sense == "E":
        return j, c, "both"
    upper = (line.sense == "L") == (c > 0)
    return j, c, "upper" if upper else "lower"


class _Bounds:
    """Tightest bound line per variable seen so far: constraints and their roundings."""

    def __init__(self):
        self.lower: Dict[int, Tuple[Fraction, int, Fraction]] = {}
        self.upper: Dict[int, Tuple[Fraction, int, Fraction]] = {}

    def offer(self, idx: int, line: Constraint) -> None:
        info = _bound_of(line)
        if info is None:
            return
        j, c, kind = info
        value = line.rhs / c
        if kind in ("lower", "both") and (j not in self.lower or value > self.lower[j][0]):
            self.lower[j] = (value, idx, c)
        if kind in ("upper", "both") and (j not in self.upper or value < self.upper[j][0]):
            self.upper[j] = (value, idx, c)


def _merge(terms) -> List[Tuple[int, Fraction]]:
    acc: Dict[int, Fraction] = {}
    for ref, m in terms:
        acc[ref] = acc.get(ref, Fraction(0)) + m
    return sorted((ref, m) for ref, m in acc.items() if m != 0)


def _complete_with_bounds(cert: Certificate, idx: int, der: Derivation, bounds: _Bounds) -> Reason:
    stated, reason = der.constraint, der.reason
    coefs, rhs = _aggregate(cert, reason.terms)
    if reason.aggregate and reason.aggregate != coefs:
        raise CompletionError("recorded aggregate does not match its terms", [idx])
    if stated.sense not in ("L", "G"):
        raise CompletionError("weak equality cannot be completed", [idx])
    extra = []
    for j in sorted(set(coefs) | set(stated.coefs)):
        delta = stated.coefs.get(j, Fraction(0)) - coefs.get(j, Fraction(0))
        if delta == 0:
            continue
        # <= targets pay a positive delta with the upper bound, >= targets with the lower
        use_upper = (delta > 0) == (stated.sense == "L")
        table = bounds.upper if use_upper else bounds.lower
        if j not in table:
            raise CompletionError(f"variable {cert.variables[j]} lacks the needed bound", [idx])
        _, ref, c = table[j]
        extra.append((ref, delta / c))
        rhs += delta / c * cert.line(ref).rhs
    ok = rhs <= stated.rhs if stated.sense == "L" else rhs >= stated.rhs
    if not ok:
        raise CompletionError("bound-completed aggregation does not reach the stated rhs", [idx])
    return Reason("lin", _merge(list(reason.terms) + extra))


def _complete_with_lp(cert: Certificate, idx: int, der: Derivation, free: List[bool]) -> Reason:
    stated = der.constraint
    if stated.sense not in ("L", "G"):
        raise CompletionError("weak equality cannot be completed", [idx])
    sign = 1 if stated.sense == "L" else -1
    rows, refs = [], []
    for k in range(idx):
        if not free[k]:
            continue
        line = cert.line(k)
        if k >= len(cert.constraints) and cert.derivations[k - len(cert.constraints)].reason.kind == "weak":
            continue
        if line.sense in ("L", "E"):
            rows.append((dict(line.coefs), line.rhs))
            refs.append((k, 1))
        if line.sense in ("G", "E"):
            rows.append(({j: -c for j, c in line.coefs.items()}, -line.rhs))
            refs.append((k, -1))
    n = len(cert.variables)
    # maximise sign * stated x  <=>  minimise -sign * stated x
    objective = {j: -sign * c for j, c in stated.coefs.items()}
    lp = LpRelaxation(n, [(-math.inf, math.inf)] * n, rows, objective)
    res = solve_exact(lp)
    if res.status == INFEASIBLE:
        # the Farkas aggregation is an absurd <= line, which implies anything
        sign = 1
    elif res.status != OPTIMAL:
        raise CompletionError(f"exact LP returned {res.status}", [idx])
    elif -res.objective_value > sign * stated.rhs:
        raise CompletionError("exact LP cannot prove the stated inequality", [idx])
    if any(d != 0 for d in res.reduced_costs):
        raise CompletionError("exact LP dual is not a pure row aggregation", [idx])
    terms = []
    for (k, s), y in zip(refs, res.row_duals):
        if y != 0:
            terms.append((k, -Fraction(y) * s * sign))
    return Reason("lin", _merge(terms))


def complete_certificate(cert: Certificate, mode: str = BOUNDS) -> Certificate:
    """Replace every weak derivation by a strict aggregation; conclusions are unchanged."""
    if mode not in (BOUNDS, EXACT_LP):
        raise ValueError(f"unknown completion mode {mode!r}")
    free = _assumption_free(cert)
    bounds = _Bounds()
    for k, line in enumerate(cert.constraints):
        bounds.offer(k, line)
    out = replace(cert, derivations=list(cert.derivations))
    failures: List[int] = []
    m = len(cert.constraints)
    for k, der in enumerate(cert.derivations):
        idx = m + k
        if der.reason.kind == "weak":
            try:
                if mode == BOUNDS:
                    reason = _complete_with_bounds(out, idx, der, bounds)
                else:
                    reason = _complete_with_lp(out, idx, der, free)
                out.derivations[k] = Derivation(der.constraint, reason)
            except CompletionError as exc:
                failures.extend(exc.indices)
        if free[idx] and der.reason.kind == "rnd":
            # rounded bound lines count as bounds, other single-variable lines do not
            bounds.offer(idx, der.constraint)
    if failures:
        raise CompletionError("completion failed", failures)
    return out
