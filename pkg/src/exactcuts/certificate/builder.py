"""Turn a solver run into a (pre-)certificate.

Constraint section: the original rows in their own sense, then one line per
finite variable bound (``x_j >= l_j`` as G, ``x_j <= u_j`` as L).  The
derivation section holds, in order: rounded integer bounds, the proof of
every cut that entered the LP, and the branch-and-bound tree in post-order.

A cut proof works in the original variables.  Every shifted variable
``x'_v >= 0`` of the rounding step is backed by a fact, i.e. a line whose
slack is exactly ``x'_v``: a bound line for structural variables and the
representable row relaxation for LP slacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from ..branch_and_bound import STATUS_INFEASIBLE, STATUS_OPTIMAL, SolveResult
from ..problem import Problem
from ..rational_core import is_finite
from ..safe_cuts.rows import UPPER, Cut
from .vipr import Certificate, Constraint, Derivation, Reason

SENSE_CODE = {"<=": "L", ">=": "G", "=": "E"}

Affine = Tuple[Dict[int, Fraction], Fraction]


class CertificateError(RuntimeError):
    """Provenance is missing or inconsistent; no certificate is written."""


@dataclass(frozen=True)
class Fact:
    """``sigma * (rhs - coefs x) >= 0`` read off line ``line``."""

    line: int
    sigma: int


def _add(acc: Dict[int, Fraction], coefs, scale) -> None:
    for j, c in coefs.items():
        acc[j] = acc.get(j, Fraction(0)) + scale * Fraction(c)


def _clean(coefs: Dict[int, Fraction]) -> Dict[int, Fraction]:
    return {j: c for j, c in sorted(coefs.items()) if c != 0}


class CertificateBuilder:
    def __init__(self, problem: Problem):
        self.problem = problem
        self.constraints: List[Constraint] = []
        for i, row in enumerate(problem.rows):
            self.constraints.append(Constraint(row.name or f"C{i}", SENSE_CODE[row.sense], row.rhs, row.coefs))
        self.lower_line: Dict[int, int] = {}
        self.upper_line: Dict[int, int] = {}
        for j, v in enumerate(problem.variables):
            if is_finite(v.lower):
                self.lower_line[j] = len(self.constraints)
                self.constraints.append(Constraint(f"lb_{v.name}", "G", v.lower, {j: 1}))
            if is_finite(v.upper):
                self.upper_line[j] = len(self.constraints)
                self.constraints.append(Constraint(f"ub_{v.name}", "L", v.upper, {j: 1}))
        self.derivations: List[Derivation] = []
        self.le_rows = problem.le_rows()
        self.cut_lines: List[int] = []
        self._relaxed: Dict[Tuple, Fact] = {}

    # -- low level -------------------------------------------------------
    def line(self, k: int) -> Constraint:
        m = len(self.constraints)
        return self.constraints[k] if k < m else self.derivations[k - m].constraint

    def add(self, name: str, sense: str, rhs, coefs, reason: Reason) -> int:
        self.derivations.append(Derivation(Constraint(name, sense, Fraction(rhs), coefs), reason))
        return len(self.constraints) + len(self.derivations) - 1

    def aggregate(self, terms) -> Affine:
        """Exact ``sum mult * (coefs of line)`` and ``sum mult * rhs``."""
        coefs: Dict[int, Fraction] = {}
        rhs = Fraction(0)
        for ref, mult in terms:
            line = self.line(ref)
            _add(coefs, line.coefs, mult)
            rhs += mult * line.rhs
        return _clean(coefs), rhs

    def add_weak(self, name: str, sense: str, rhs, coefs, terms) -> int:
        agg, _ = self.aggregate(terms)
        return self.add(name, sense, rhs, coefs, Reason("weak", list(terms), aggregate=agg))

    # -- global bounds ---------------------------------------------------
    def round_integer_bounds(self) -> None:
        for j, v in enumerate(self.problem.variables):
            if not v.is_integer:
                continue
            if j in self.lower_line and Fraction(v.lower).denominator != 1:
                self.lower_line[j] = self.add(f"lbr_{v.name}", "G", math.ceil(v.lower), {j: 1},
                                              Reason("rnd", [(self.lower_line[j], Fraction(1))]))
            if j in self.upper_line and Fraction(v.upper).denominator != 1:
                self.upper_line[j] = self.add(f"ubr_{v.name}", "L", math.floor(v.upper), {j: 1},
                                              Reason("rnd", [(self.upper_line[j], Fraction(1))]))

    # -- LP rows -------------------------------------------------------------
    def lp_row_fact(self, r: int) -> Fact:
        """The line whose ``sigma``-signed slack is the slack of LP row ``r``."""
        nb = len(self.le_rows)
        if r < nb:
            row, sign = self.le_rows[r].origin
            return Fact(row, sign)
        k = r - nb
        if k >= len(self.cut_lines):
            raise CertificateError(f"LP row {r} refers to a cut without a proof")
        return Fact(self.cut_lines[k], 1)

    def lp_row_exact(self, r: int) -> Affine:
        fact = self.lp_row_fact(r)
        line = self.line(fact.line)
        return {j: fact.sigma * c for j, c in line.coefs.items()}, fact.sigma * line.rhs

    def relaxed_row_fact(self, r: int, coefs, rhs) -> Fact:
        """Fact for the representable relaxation ``coefs x <= rhs`` of LP row ``r``."""
        coefs = _clean({j: Fraction(c) for j, c in coefs.items()})
        rhs = Fraction(rhs)
        exact_coefs, exact_rhs = self.lp_row_exact(r)
        if _clean(exact_coefs) == coefs and exact_rhs == rhs:
            return self.lp_row_fact(r)
        key = (r, tuple(coefs.items()), rhs)
        if key not in self._relaxed:
            base = self.lp_row_fact(r)
            idx = self.add_weak(f"F{r}_{len(self._relaxed)}", "L", rhs, coefs, [(base.line, Fraction(base.sigma))])
            self._relaxed[key] = Fact(idx, 1)
        return self._relaxed[key]

    # -- cuts ------------------------------------------------------------
    def emit_cut(self, cut: Cut, tag: str) -> int:
        """Write the proof of ``cut`` and return the index of the line stating it."""
        idx = emit_mir_proof(self, cut, tag)
        self.cut_lines.append(idx)
        return idx

    # -- tree ------------------------------------------------------------
    def node_bound_terms(self, lp_result, lower: Dict[int, int], upper: Dict[int, int]):
        terms: Dict[int, Fraction] = {}
        for r, y in enumerate(lp_result.row_duals):
            y = Fraction(y)
            if y != 0:
                fact = self.lp_row_fact(r)
                terms[fact.line] = terms.get(fact.line, Fraction(0)) + y * fact.sigma
        for j, dj in enumerate(lp_result.reduced_costs):
            dj = Fraction(dj)
            if dj > 0:
                ref = lower.get(j)
            elif dj < 0:
                ref = upper.get(j)
            else:
                continue
            if ref is None:
                raise CertificateError(f"reduced cost on variable {j} needs a missing bound")
            terms[ref] = terms.get(ref, Fraction(0)) + dj
        return sorted((ref, m) for ref, m in terms.items() if m != 0)

    def emit_tree(self, result: SolveResult, target: Constraint) -> int:
        if not result.tree:
            raise CertificateError("solve result carries no tree")
        root = min(result.tree)
        return self._emit_node(result, root, dict(self.lower_line), dict(self.upper_line), target)

    def _emit_node(self, result: SolveResult, nid: int, lower, upper, target: Constraint) -> int:
        rec = result.tree[nid]
        name = f"N{nid}"
        if rec.kind == "branch":
            down, up = rec.children
            j, _, v = result.tree[down].node.branch
            a_left = self.add(f"A{down}", "L", v, {j: 1}, Reason("asm"))
            left = self._emit_node(result, down, lower, {**upper, j: a_left}, target)
            a_right = self.add(f"A{up}", "G", v + 1, {j: 1}, Reason("asm"))
            right = self._emit_node(result, up, {**lower, j: a_right}, upper, target)
            return self.add(name, target.sense, target.rhs, target.coefs, Reason("uns", unsplit=(left, a_left, right, a_right)))
        if rec.kind == "empty":
            j = rec.result.empty_box
            if j not in lower or j not in upper:
                raise CertificateError(f"empty box on variable {j} without both bounds")
            terms = [(lower[j], Fraction(1)), (upper[j], Fraction(-1))]
            return self.add(name, target.sense, target.rhs, target.coefs, Reason("lin", sorted(terms)))
        if rec.kind in ("bound", "infeasible"):
            if rec.result is None:
                raise CertificateError("tree was recorded without LP data")
            terms = self.node_bound_terms(rec.result, lower, upper)
            return self.add(name, target.sense, target.rhs, target.coefs, Reason("lin", terms))
        raise CertificateError(f"node {nid} left open")

    def certificate(self, rtp, solutions) -> Certificate:
        p = self.problem
        return Certificate(
            variables=[v.name for v in p.variables],
            integers=list(p.integer_indices),
            objective=dict(p.objective),
            constraints=list(self.constraints),
            rtp=rtp,
            solutions=solutions,
            derivations=list(self.derivations),
        )


# --------------------------------------------------------------------------
# MIR proof

def _shifted(builder: CertificateBuilder, v, cut: Cut) -> Tuple[Affine, Fact]:
    """``x'_v`` as an affine function of ``x`` plus the fact proving ``x'_v >= 0``."""
    data = cut.mir
    if isinstance(v, tuple):
        r = v[1]
        if r not in cut.slack_rows:
            raise CertificateError(f"slack of LP row {r} has no stored relaxation")
        coefs, rhs = cut.slack_rows[r]
        fact = builder.relaxed_row_fact(r, coefs, rhs)
        return ({j: -Fraction(c) for j, c in coefs.items()}, Fraction(rhs)), fact
    lo, up = data.ext_bounds[v]
    if data.sides[v] == UPPER:
        if v not in builder.upper_line:
            raise CertificateError(f"variable {v} has no upper bound line")
        return ({v: Fraction(-1)}, Fraction(up)), Fact(builder.upper_line[v], 1)
    if v not in builder.lower_line:
        raise CertificateError(f"variable {v} has no lower bound line")
    return ({v: Fraction(1)}, -Fraction(lo)), Fact(builder.lower_line[v], -1)


def _combine(parts) -> Affine:
    """``sum k * expr`` for ``(k, expr)`` pairs."""
    coefs: Dict[int, Fraction] = {}
    const = Fraction(0)
    for k, (c, c0) in parts:
        _add(coefs, c, k)
        const += k * c0
    return _clean(coefs), const


def _fact_terms(facts, conclusion: str) -> List[Tuple[int, Fraction]]:
    """Multipliers adding ``k * x'_v >= 0`` into a conclusion of the given sense."""
    terms: Dict[int, Fraction] = {}
    for k, fact in facts:
        if k == 0:
            continue
        m = k * fact.sigma if conclusion == "L" else -k * fact.sigma
        terms[fact.line] = terms.get(fact.line, Fraction(0)) + m
    return [(ref, m) for ref, m in terms.items() if m != 0]


def emit_mir_proof(builder: CertificateBuilder, cut: Cut, tag: str) -> int:
    """Disjunctive proof of the exact MIR inequality, then the weakened safe cut.

    Lines, with ``w`` the integer split expression and ``u >= 0`` the
    continuous part: base row, ``u >= 0``, ``u - w >= -d``, assumption
    ``w <= floor(d)``, side 1, assumption ``-w <= -(floor(d)+1)``, side 2,
    unsplit, then the cut itself as a weak aggregation.
    """
    data, base = cut.mir, cut.base
    if data is None or base is None:
        raise CertificateError(f"cut {tag} has no rounding provenance")
    f = Fraction(data.f)
    one_minus_f = 1 - f
    floor_d = Fraction(data.floor_d)
    d = Fraction(data.d)

    # base row in x-space: structural part plus lambda_r * (slack expression)
    base_parts = [(Fraction(1), ({j: Fraction(a) for j, a in base.coefs.items()}, -Fraction(base.rhs)))]
    shifted = {}
    for v in data.transformed:
        shifted[v] = _shifted(builder, v, cut)
    for r, (lam, _) in base.slack_terms.items():
        expr, _ = shifted[("s", r)] if ("s", r) in shifted else _shifted(builder, ("s", r), cut)
        base_parts.append((Fraction(lam), expr))
    b_coefs, b_const = _combine(base_parts)
    b_line = builder.add_weak(f"{tag}_base", "L", -b_const, b_coefs, [])

    n1, n2, cminus, cplus = [], [], [], []
    for v, a in data.transformed.items():
        a = Fraction(a)
        if data.is_integer[v]:
            (n1 if data.f_int[v] <= f else n2).append(v)
        elif a < 0:
            cminus.append(v)
        else:
            cplus.append(v)
    alpha = {v: Fraction(a) for v, a in data.transformed.items()}

    # u = sum_{N2} (ceil a - a) x' + sum_{C-} (-a) x'
    u_parts = [(math.ceil(alpha[v]) - alpha[v], v) for v in n2] + [(-alpha[v], v) for v in cminus]
    u_expr = _combine([(k, shifted[v][0]) for k, v in u_parts])
    w_parts = [(Fraction(math.floor(alpha[v])), v) for v in n1] + [(Fraction(math.ceil(alpha[v])), v) for v in n2]
    w_expr = _combine([(k, shifted[v][0]) for k, v in w_parts])

    # u >= 0
    du_terms = _fact_terms([(k, shifted[v][1]) for k, v in u_parts], "G")
    du = builder.add(f"{tag}_u", "G", -u_expr[1], u_expr[0], Reason("lin", du_terms))

    # u - w >= -d from the base row and the dropped nonnegative terms
    uw = _combine([(Fraction(1), u_expr), (Fraction(-1), w_expr)])
    drop = [(data.f_int[v], shifted[v][1]) for v in n1] + [(alpha[v], shifted[v][1]) for v in cplus]
    db_terms = [(b_line, Fraction(-1))] + _fact_terms(drop, "G")
    db = builder.add(f"{tag}_uw", "G", -d - uw[1], uw[0], Reason("lin", _merge(db_terms)))

    # exact MIR: w - u/(1-f) <= floor(d)
    mir = _combine([(Fraction(1), w_expr), (-1 / one_minus_f, u_expr)])
    a1 = builder.add(f"{tag}_w0", "L", floor_d - w_expr[1], w_expr[0], Reason("asm"))
    s1 = builder.add(f"{tag}_s1", "L", floor_d - mir[1], mir[0],
                     Reason("lin", [(a1, Fraction(1)), (du, -1 / one_minus_f)]))
    neg_w = {j: -c for j, c in w_expr[0].items()}
    a2 = builder.add(f"{tag}_w1", "L", -(floor_d + 1) + w_expr[1], neg_w, Reason("asm"))
    s2 = builder.add(f"{tag}_s2", "L", floor_d - mir[1], mir[0],
                     Reason("lin", [(db, -1 / one_minus_f), (a2, f / one_minus_f)]))
    m_line = builder.add(f"{tag}_mir", "L", floor_d - mir[1], mir[0], Reason("uns", unsplit=(s1, a1, s2, a2)))

    # safe cut: scaled exact MIR plus the slack rows for the rounded-down slack coefficients
    s = Fraction(cut.scaling_factor)
    final_terms = [(m_line, s)]
    for r, k in sorted(cut.aggregation.exact_slack_corrections.items()):
        fact = shifted[("s", r)][1]
        final_terms.append((fact.line, s * k * fact.sigma))
    final_terms = _merge(final_terms)
    if cut.integral_scaled:
        scaled = _clean({j: Fraction(c) for j, c in cut.coefs.items()})
        unrounded = Fraction(cut.unrounded_rhs)
        weak_line = builder.add_weak(f"{tag}_scaled", "L", unrounded, scaled, final_terms)
        rounded = builder.add(f"{tag}", "L", math.floor(unrounded), scaled, Reason("rnd", [(weak_line, Fraction(1))]))
        if Fraction(math.floor(unrounded)) == Fraction(cut.rhs):
            return rounded
        return builder.add_weak(f"{tag}_lim", "L", cut.rhs, cut.coefs, [(rounded, Fraction(1))])
    return builder.add_weak(tag, "L", cut.rhs, cut.coefs, final_terms)


def _merge(terms) -> List[Tuple[int, Fraction]]:
    acc: Dict[int, Fraction] = {}
    order: List[int] = []
    for ref, m in terms:
        if ref not in acc:
            order.append(ref)
            acc[ref] = Fraction(0)
        acc[ref] += m
    return [(ref, acc[ref]) for ref in order if acc[ref] != 0]


# --------------------------------------------------------------------------

def log_and_write(problem: Problem, result: SolveResult) -> Certificate:
    """Pre-certificate for a finished solve (may contain weak records)."""
    if result.status not in (STATUS_OPTIMAL, STATUS_INFEASIBLE):
        raise CertificateError(f"cannot certify a run with status {result.status}")
    builder = CertificateBuilder(problem)
    builder.round_integer_bounds()
    for k, cut in enumerate(result.cuts):
        builder.emit_cut(cut, f"cut{k}")
    if result.status == STATUS_OPTIMAL:
        target = Constraint("obj", "G", result.objective, problem.objective)
        rtp = ("range", result.objective, result.objective)
        solutions = [("best", _clean({j: Fraction(v) for j, v in enumerate(result.incumbent)}))]
    else:
        target = Constraint("infeasible", "G", 1, {})
        rtp = ("infeas",)
        solutions = []
    builder.emit_tree(result, target)
    return builder.certificate(rtp, solutions)
