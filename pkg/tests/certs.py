"""Certificate helpers shared by the certificate tests and the acceptance suite."""

from __future__ import annotations

import copy
import random
from fractions import Fraction

from exactcuts.branch_and_bound import STATUS_INFEASIBLE, STATUS_OPTIMAL, SolverConfig, solve
from exactcuts.certificate import (
    BOUNDS,
    EXACT_LP,
    Certificate,
    Constraint,
    Derivation,
    Reason,
    check_certificate,
    complete_certificate,
    log_and_write,
    write_certificate,
)
from exactcuts.certificate.checker import is_absurd
from exactcuts.generate import GeneratorConfig, generate_battery
from exactcuts.problem import Problem, Row
from exactcuts.safe_cuts import SeparatorConfig, choose_bound_sides, gmi_from_row
from exactcuts.safe_cuts.separator import relax_rows
from oracles import cut_is_valid, lp_of

SPLIT_PROBLEM = """\
VAR 2
w -2 10 int
u 0 +inf cont
OBJ min
w -1
u 2

CON 1
base <= 5/2 w 1 u -1
"""

SIGNED_PROBLEM = """\
VAR 4
x1 0 4 int
x2 0 4 int
yp 0 3 cont
ym 0 3 cont
OBJ min
x1 -3/2
x2 -1
yp 1
ym 1

CON 1
base <= 7/2 x1 3/2 x2 1 yp 1 ym -1
"""

SENSE_ROW = {"L": "<=", "G": ">=", "E": "="}


def by_name(cert: Certificate, name: str):
    m = len(cert.constraints)
    for k, der in enumerate(cert.derivations):
        if der.constraint.name == name:
            return m + k, der
    raise KeyError(name)


def block(cert: Certificate, tag: str):
    return {suffix: by_name(cert, f"{tag}_{suffix}") for suffix in ("u", "uw", "w0", "s1", "w1", "s2", "mir")}


def mir_pattern_holds(cert: Certificate, tag: str, f: Fraction) -> bool:
    """Side 1 is ``A1 - u/(1-f)``; side 2 is ``-D_b/(1-f) + f/(1-f) A2``."""
    b = block(cert, tag)
    s1 = dict(b["s1"][1].reason.terms)
    s2 = dict(b["s2"][1].reason.terms)
    return (
        s1 == {b["w0"][0]: 1, b["u"][0]: -1 / (1 - f)}
        and s2 == {b["uw"][0]: -1 / (1 - f), b["w1"][0]: f / (1 - f)}
        and b["mir"][1].reason.unsplit == (b["s1"][0], b["w0"][0], b["s2"][0], b["w1"][0])
    )


def assert_mir_pattern(cert: Certificate, tag: str, f: Fraction) -> None:
    b = block(cert, tag)
    assert mir_pattern_holds(cert, tag, f), [b[k][1].reason for k in ("s1", "s2", "mir")]


def mir_cut_of_row(problem: Problem):
    """Safe cut from the first row with multiplier 1, sides at the lower bounds."""
    lp = lp_of(problem)
    point = [0.0] * problem.n
    sides = choose_bound_sides(range(problem.n), lp.bounds, point)
    ints = [v.is_integer for v in problem.variables]
    return gmi_from_row(lp, relax_rows(lp, sides), [1.0], ints, sides, point, SeparatorConfig())


def certify(problem: Problem, config: SolverConfig = None):
    config = config or SolverConfig()
    config.record_tree = True
    result = solve(problem, config)
    assert result.status in (STATUS_OPTIMAL, STATUS_INFEASIBLE)
    return result, log_and_write(problem, result)


def slack_certificate(with_bound: bool = True) -> Certificate:
    cons = [
        Constraint("C1", "L", Fraction(2), {0: Fraction(3), 1: Fraction(-4)}),
        Constraint("C2", "L", Fraction(3), {0: Fraction(-1), 1: Fraction(6)}),
    ]
    if with_bound:
        cons.append(Constraint("B3", "L", Fraction(4), {1: Fraction(1)}))
    terms = [(0, Fraction(1, 3)), (1, Fraction(1))]
    ders = [
        Derivation(Constraint("C4", "L", Fraction(11, 3), {1: Fraction(14, 3)}), Reason("lin", list(terms))),
        Derivation(Constraint("C5", "L", Fraction(5), {1: Fraction(5)}), Reason("weak", list(terms), aggregate={1: Fraction(14, 3)})),
    ]
    return Certificate(["x1", "x2"], [0, 1], {}, cons, ("range", float("-inf"), float("inf")), [], ders)


def active_assumptions(cert: Certificate):
    m = len(cert.constraints)
    active = [frozenset()] * m
    for k, der in enumerate(cert.derivations):
        r = der.reason
        if r.kind == "asm":
            a = frozenset([m + k])
        elif r.kind == "uns":
            i1, a1, i2, a2 = r.unsplit
            a = (active[i1] - {a1}) | (active[i2] - {a2})
        else:
            a = frozenset().union(*(active[ref] for ref, _ in r.terms))
        active.append(a)
    return active


def line_holds(problem: Problem, cert: Certificate, idx: int, assumptions) -> bool:
    """The line at ``idx`` holds on the mixed-integer set cut down by the assumptions."""
    rows = list(problem.rows)
    for a in sorted(assumptions):
        line = cert.line(a)
        rows.append(Row(dict(line.coefs), SENSE_ROW[line.sense], line.rhs, line.name))
    local = Problem(problem.variables, rows, problem.objective, problem.name)
    line = cert.line(idx)
    checks = []
    if line.sense in ("L", "E"):
        checks.append((line.coefs, line.rhs))
    if line.sense in ("G", "E"):
        checks.append(({j: -c for j, c in line.coefs.items()}, -line.rhs))
    return all(cut_is_valid(local, coefs, rhs) for coefs, rhs in checks)


MUTATIONS = [
    lambda x: x + 1,
    lambda x: x - 1,
    lambda x: 2 * x,
    lambda x: -x,
    lambda x: x + Fraction(1, 2),
    lambda x: x - Fraction(1, 3),
]


def _fields(der: Derivation):
    fields = [("rhs", None)] + [("coef", j) for j in der.constraint.coefs]
    return fields + [("mult", t) for t in range(len(der.reason.terms))]


def _apply(cert: Certificate, k: int, kind: str, key, op):
    out = copy.deepcopy(cert)
    d = out.derivations[k]
    if kind == "rhs":
        old = d.constraint.rhs
        d.constraint.rhs = new = op(old)
    elif kind == "coef":
        old = d.constraint.coefs[key]
        d.constraint.coefs[key] = new = op(old)
    else:
        ref, old = d.reason.terms[key]
        new = op(old)
        d.reason.terms[key] = (ref, new)
    if new == old or new == 0:
        return None
    return out, len(cert.constraints) + k, kind, old, new


def mutate(cert: Certificate, rng: random.Random):
    """Change one random rational literal of the derivation section."""
    while True:
        k = rng.randrange(len(cert.derivations))
        kind, key = rng.choice(_fields(cert.derivations[k]))
        got = _apply(cert, k, kind, key, rng.choice(MUTATIONS))
        if got is not None:
            return got


def literal_mutants(cert: Certificate):
    """Every mutation of every rational literal of the derivation section."""
    for k, der in enumerate(cert.derivations):
        for kind, key in _fields(der):
            for op in MUTATIONS:
                got = _apply(cert, k, kind, key, op)
                if got is not None:
                    yield got


def harmless(cert: Certificate, idx: int, kind: str, old: Fraction, new: Fraction) -> bool:
    """An rhs moved the weak way, or an absurd line that stays absurd."""
    if kind != "rhs":
        return False
    line = cert.line(idx)
    if weakens(line.sense, line.coefs, old, new):
        return True
    return is_absurd(line.sense, line.coefs, old) and is_absurd(line.sense, line.coefs, new)


def weakens(sense: str, coefs, old: Fraction, new: Fraction) -> bool:
    if sense == "L":
        return new > old
    if sense == "G":
        return new < old
    return False


def tamper_fuzz(count: int, seed: int = 0):
    """Mutate solver certificates ``count`` times.

    Returns (accepted, harmless, sound, bad): accepted mutants that only
    weaken, that still state a valid line per the enumeration oracle, and
    the rest.
    """
    pool = []
    for problem in generate_battery(seed, 12, 0.4, GeneratorConfig(max_vars=4, max_rows=5)):
        result = solve(problem, SolverConfig(record_tree=True))
        if result.status not in (STATUS_OPTIMAL, STATUS_INFEASIBLE):
            continue
        pre = log_and_write(problem, result)
        for mode in (BOUNDS, EXACT_LP):
            done = complete_certificate(pre, mode)
            assert check_certificate(done)
            pool.append((problem, done, active_assumptions(done)))
    rng = random.Random(seed)
    accepted = weakened = sound = 0
    bad = []
    for _ in range(count):
        problem, cert, active = rng.choice(pool)
        mutant, idx, kind, old, new = mutate(cert, rng)
        if not check_certificate(write_certificate(mutant)):
            continue
        accepted += 1
        if harmless(mutant, idx, kind, old, new):
            weakened += 1
        elif line_holds(problem, mutant, idx, active[idx]):
            sound += 1
        else:
            bad.append((problem.name, idx, kind, old, new))
    return accepted, weakened, sound, bad
