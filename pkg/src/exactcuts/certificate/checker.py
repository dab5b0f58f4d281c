"""Independent certificate checker.

Shares nothing with the solver beyond exact rational parsing and the file
format.  One forward pass verifies every derivation in exact arithmetic
while tracking the set of active assumptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from .vipr import Certificate, CertificateParseError, Constraint, parse_certificate

Coefs = Dict[int, Fraction]


class Rejected(Exception):
    def __init__(self, reason: str, index: Optional[int] = None):
        super().__init__(reason)
        self.reason = reason
        self.index = index


@dataclass
class Verdict:
    accepted: bool
    reason: str = ""
    index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.accepted


def is_absurd(sense: str, coefs: Coefs, rhs: Fraction) -> bool:
    if any(c != 0 for c in coefs.values()):
        return False
    if sense == "L":
        return rhs < 0
    if sense == "G":
        return rhs > 0
    return rhs != 0


def _clean(coefs: Coefs) -> Coefs:
    return {j: c for j, c in coefs.items() if c != 0}


def _as_le(sense: str, coefs: Coefs, rhs: Fraction) -> List[Tuple[Coefs, Fraction]]:
    coefs = _clean(coefs)
    neg = {j: -c for j, c in coefs.items()}
    if sense == "L":
        return [(coefs, rhs)]
    if sense == "G":
        return [(neg, -rhs)]
    return [(coefs, rhs), (neg, -rhs)]


def dominates(agg: Tuple[str, Coefs, Fraction], stated: Constraint) -> bool:
    """The aggregate implies ``stated``: same sense, identical coefficients and a tighter rhs, or absurd."""
    sense, coefs, rhs = agg
    if is_absurd(sense, coefs, rhs):
        return True
    if sense != "E" and sense != stated.sense:
        return False
    have = _as_le(sense, coefs, rhs)
    for want_coefs, want_rhs in _as_le(stated.sense, stated.coefs, stated.rhs):
        if not any(c == want_coefs and r <= want_rhs for c, r in have):
            return False
    return True


def aggregate(cert: Certificate, terms, upto: int) -> Tuple[str, Coefs, Fraction]:
    """Exact ``sum mult * line`` with the sense implied by the multiplier signs."""
    coefs: Coefs = {}
    rhs = Fraction(0)
    le = ge = False
    for ref, mult in terms:
        if not 0 <= ref < upto:
            raise Rejected(f"reference {ref} is not an earlier line")
        if mult == 0:
            continue
        line = cert.line(ref)
        if line.sense == "L":
            le, ge = (le or mult > 0), (ge or mult < 0)
        elif line.sense == "G":
            le, ge = (le or mult < 0), (ge or mult > 0)
        for j, c in line.coefs.items():
            coefs[j] = coefs.get(j, Fraction(0)) + mult * c
        rhs += mult * line.rhs
    if le and ge:
        raise Rejected("multiplier signs mix <= and >= directions")
    sense = "L" if le else ("G" if ge else "E")
    return sense, _clean(coefs), rhs


def _complementary(cert: Certificate, a1: Constraint, a2: Constraint, ints: FrozenSet[int]) -> bool:
    """``a1`` and ``a2`` are ``p x <= d`` and ``p x >= d + 1`` for an integral split."""
    le1 = _as_le(a1.sense, a1.coefs, a1.rhs)
    le2 = _as_le(a2.sense, a2.coefs, a2.rhs)
    if len(le1) != 1 or len(le2) != 1:
        return False
    (p, d), (q, e) = le1[0], le2[0]
    if {j: -c for j, c in q.items()} != p:
        return False
    if d.denominator != 1 or e.denominator != 1:
        return False
    if any(j not in ints or c.denominator != 1 for j, c in p.items()):
        return False
    return -e == d + 1


def _check_solution(cert: Certificate, values: Coefs, ints: FrozenSet[int]) -> bool:
    for j in ints:
        if values.get(j, Fraction(0)).denominator != 1:
            return False
    for c in cert.constraints:
        act = sum((coef * values.get(j, Fraction(0)) for j, coef in c.coefs.items()), Fraction(0))
        if c.sense == "L" and act > c.rhs:
            return False
        if c.sense == "G" and act < c.rhs:
            return False
        if c.sense == "E" and act != c.rhs:
            return False
    return True


def _verify(cert: Certificate) -> None:
    ints = frozenset(cert.integers)
    m = len(cert.constraints)
    active: List[FrozenSet[int]] = [frozenset()] * m
    is_asm = [False] * m
    for k, der in enumerate(cert.derivations):
        idx = m + k
        stated, reason = der.constraint, der.reason
        try:
            if reason.kind == "asm":
                assumptions = frozenset([idx])
            elif reason.kind == "lin":
                agg = aggregate(cert, reason.terms, idx)
                if not dominates(agg, stated):
                    raise Rejected("aggregation does not dominate the stated constraint")
                assumptions = frozenset().union(*(active[r] for r, mult in reason.terms if mult != 0))
            elif reason.kind == "rnd":
                sense, coefs, rhs = aggregate(cert, reason.terms, idx)
                if sense == "E":
                    raise Rejected("rounding needs an inequality")
                if any(j not in ints or c.denominator != 1 for j, c in coefs.items()):
                    raise Rejected("rounding needs integer coefficients on integer variables")
                rounded = Fraction(math.floor(rhs) if sense == "L" else math.ceil(rhs))
                if stated.sense != sense or stated.coefs != coefs or stated.rhs != rounded:
                    raise Rejected("rounded constraint does not match the stated one")
                assumptions = frozenset().union(*(active[r] for r, mult in reason.terms if mult != 0))
            elif reason.kind == "uns":
                i1, a1, i2, a2 = reason.unsplit
                for ref in reason.unsplit:
                    if not 0 <= ref < idx:
                        raise Rejected(f"reference {ref} is not an earlier line")
                if not (is_asm[a1] and is_asm[a2]):
                    raise Rejected("unsplit must name two assumptions")
                if not _complementary(cert, cert.line(a1), cert.line(a2), ints):
                    raise Rejected("assumptions are not a complementary integer split")
                for ref in (i1, i2):
                    line = cert.line(ref)
                    if not dominates((line.sense, line.coefs, line.rhs), stated):
                        raise Rejected(f"line {ref} does not dominate the unsplit constraint")
                assumptions = (active[i1] - {a1}) | (active[i2] - {a2})
            elif reason.kind == "weak":
                raise Rejected(f"weak record at DER {idx}; complete the certificate first")
            else:
                raise Rejected(f"unknown reason {reason.kind!r}")
        except Rejected as exc:
            if exc.index is None:
                exc.index = idx
            raise
        active.append(assumptions)
        is_asm.append(reason.kind == "asm")

    for name, values in cert.solutions:
        if not _check_solution(cert, values, ints):
            raise Rejected(f"solution {name} is infeasible")
    last_idx = cert.n_lines - 1
    if cert.rtp[0] == "infeas":
        if cert.solutions:
            raise Rejected("infeasible claim comes with a solution")
        if not cert.derivations:
            raise Rejected("no derivation proves infeasibility")
        last = cert.line(last_idx)
        if active[last_idx]:
            raise Rejected("undischarged assumptions", last_idx)
        if not is_absurd(last.sense, last.coefs, last.rhs):
            raise Rejected("last derivation is not an absurdity", last_idx)
        return
    _, lb, ub = cert.rtp
    if lb != float("-inf"):
        if not cert.derivations:
            raise Rejected("no derivation proves the lower bound")
        last = cert.line(last_idx)
        if active[last_idx]:
            raise Rejected("undischarged assumptions", last_idx)
        goal = Constraint("goal", "G", Fraction(lb), cert.objective)
        if not dominates((last.sense, last.coefs, last.rhs), goal):
            raise Rejected("last derivation does not prove the objective lower bound", last_idx)
    if ub != float("inf"):
        best = None
        for _, values in cert.solutions:
            val = sum((c * values.get(j, Fraction(0)) for j, c in cert.objective.items()), Fraction(0))
            best = val if best is None else min(best, val)
        if best is None or best > Fraction(ub):
            raise Rejected("no solution attains the claimed upper bound")


def check_certificate(source: Union[str, bytes, Certificate]) -> Verdict:
    try:
        cert = source if isinstance(source, Certificate) else parse_certificate(source)
    except CertificateParseError as exc:
        return Verdict(False, f"parse error: {exc}", None)
    try:
        _verify(cert)
    except Rejected as exc:
        return Verdict(False, exc.reason, exc.index)
    return Verdict(True)
