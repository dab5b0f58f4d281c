"""Certificate data model and the line-oriented text format.

Layout::

    VER 1.1
    VAR <n>
    <name> ... (n names)
    INT <k>
    <index> ... (k indices)
    OBJ min
    <nnz> {<var> <coef>}*
    CON <m>
    <name> <L|G|E> <rhs> <nnz> {<var> <coef>}*      (m lines)
    RTP infeas | RTP range <lb> <ub>
    SOL <s>
    <name> <nnz> {<var> <value>}*                    (s lines)
    DER <d>
    <index> <name> <L|G|E> <rhs> <nnz> {<var> <coef>}* { <reason> }

Reasons are ``asm``, ``lin <k> {<ref> <mult>}*``, ``rnd <k> {<ref> <mult>}*``,
``uns <i1> <a1> <i2> <a2>`` and the pre-certificate extension
``weak <k> {<ref> <mult>}* <nnz> {<var> <coef>}*`` whose trailing block is
the exact aggregate of the listed terms.  Constraint lines are numbered
from 0, derivations continue the numbering.  ``%`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from ..rational_core import format_rational, parse_bound, parse_rational

SENSES = ("L", "G", "E")
REASONS = ("asm", "lin", "rnd", "uns", "weak")


class CertificateParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class Constraint:
    name: str
    sense: str
    rhs: Fraction
    coefs: Dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        self.coefs = {j: Fraction(c) for j, c in sorted(self.coefs.items()) if c != 0}
        self.rhs = Fraction(self.rhs)


@dataclass
class Reason:
    kind: str
    terms: List[Tuple[int, Fraction]] = field(default_factory=list)
    unsplit: Optional[Tuple[int, int, int, int]] = None
    # weak records only: exact aggregate coefficients of ``terms``
    aggregate: Dict[int, Fraction] = field(default_factory=dict)


@dataclass
class Derivation:
    constraint: Constraint
    reason: Reason


@dataclass
class Certificate:
    variables: List[str]
    integers: List[int]
    objective: Dict[int, Fraction]
    constraints: List[Constraint]
    # ("infeas",) or ("range", lb, ub) with +-inf allowed
    rtp: Tuple
    solutions: List[Tuple[str, Dict[int, Fraction]]] = field(default_factory=list)
    derivations: List[Derivation] = field(default_factory=list)

    def line(self, k: int) -> Constraint:
        m = len(self.constraints)
        return self.constraints[k] if k < m else self.derivations[k - m].constraint

    @property
    def n_lines(self) -> int:
        return len(self.constraints) + len(self.derivations)

    def has_weak(self) -> bool:
        return any(d.reason.kind == "weak" for d in self.derivations)


# --------------------------------------------------------------------------
# writing

def _fmt_bound(x) -> str:
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    return format_rational(x)


def _fmt_coefs(coefs: Dict[int, Fraction]) -> str:
    parts = [str(len(coefs))]
    for j in sorted(coefs):
        parts.append(f"{j} {format_rational(coefs[j])}")
    return " ".join(parts)


def _fmt_terms(terms) -> str:
    parts = [str(len(terms))]
    for ref, mult in terms:
        parts.append(f"{ref} {format_rational(mult)}")
    return " ".join(parts)


def format_reason(reason: Reason) -> str:
    if reason.kind == "asm":
        body = "asm"
    elif reason.kind in ("lin", "rnd"):
        body = f"{reason.kind} {_fmt_terms(reason.terms)}"
    elif reason.kind == "uns":
        body = "uns " + " ".join(str(v) for v in reason.unsplit)
    elif reason.kind == "weak":
        body = f"weak {_fmt_terms(reason.terms)} {_fmt_coefs(reason.aggregate)}"
    else:
        raise ValueError(f"unknown reason {reason.kind!r}")
    return "{ " + body + " }"


def _fmt_constraint(c: Constraint) -> str:
    return f"{c.name} {c.sense} {format_rational(c.rhs)} {_fmt_coefs(c.coefs)}"


def write_certificate(cert: Certificate) -> str:
    out = ["VER 1.1", f"VAR {len(cert.variables)}"]
    out.extend(cert.variables)
    out.append(f"INT {len(cert.integers)}")
    if cert.integers:
        out.append(" ".join(str(j) for j in cert.integers))
    out.append("OBJ min")
    out.append(_fmt_coefs(cert.objective))
    out.append(f"CON {len(cert.constraints)}")
    out.extend(_fmt_constraint(c) for c in cert.constraints)
    if cert.rtp[0] == "infeas":
        out.append("RTP infeas")
    else:
        out.append(f"RTP range {_fmt_bound(cert.rtp[1])} {_fmt_bound(cert.rtp[2])}")
    out.append(f"SOL {len(cert.solutions)}")
    for name, values in cert.solutions:
        out.append(f"{name} {_fmt_coefs(values)}")
    out.append(f"DER {len(cert.derivations)}")
    m = len(cert.constraints)
    for k, d in enumerate(cert.derivations):
        out.append(f"{m + k} {_fmt_constraint(d.constraint)} {format_reason(d.reason)}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# parsing

class _Tokens:
    def __init__(self, text: str):
        self.items: List[Tuple[str, int]] = []
        for no, raw in enumerate(text.splitlines(), start=1):
            for tok in raw.split("%", 1)[0].split():
                self.items.append((tok, no))
        self.pos = 0

    def line(self) -> int:
        if self.pos < len(self.items):
            return self.items[self.pos][1]
        return self.items[-1][1] if self.items else 0

    def next(self, what: str = "token") -> str:
        if self.pos >= len(self.items):
            raise CertificateParseError(f"unexpected end of file, expected {what}", self.line())
        tok = self.items[self.pos][0]
        self.pos += 1
        return tok

    def expect(self, word: str) -> None:
        line = self.line()
        tok = self.next(word)
        if tok != word:
            raise CertificateParseError(f"expected {word!r}, got {tok!r}", line)

    def integer(self, what: str = "integer") -> int:
        line = self.line()
        tok = self.next(what)
        try:
            return int(tok)
        except ValueError:
            raise CertificateParseError(f"expected {what}, got {tok!r}", line) from None

    def count(self, what: str) -> int:
        line = self.line()
        k = self.integer(what)
        if k < 0:
            raise CertificateParseError(f"negative {what}", line)
        return k

    def rational(self) -> Fraction:
        line = self.line()
        tok = self.next("number")
        try:
            return parse_rational(tok)
        except (ValueError, ZeroDivisionError):
            raise CertificateParseError(f"bad number {tok!r}", line) from None

    def bound(self):
        line = self.line()
        tok = self.next("bound")
        try:
            return parse_bound(tok)
        except (ValueError, ZeroDivisionError):
            raise CertificateParseError(f"bad bound {tok!r}", line) from None

    def done(self) -> bool:
        return self.pos >= len(self.items)


def _parse_coefs(tok: _Tokens, n: int) -> Dict[int, Fraction]:
    k = tok.count("number of entries")
    coefs: Dict[int, Fraction] = {}
    for _ in range(k):
        line = tok.line()
        j = tok.integer("variable index")
        if not 0 <= j < n:
            raise CertificateParseError(f"variable index {j} out of range", line)
        if j in coefs:
            raise CertificateParseError(f"variable index {j} repeated", line)
        coefs[j] = tok.rational()
    return coefs


def _parse_sense(tok: _Tokens) -> str:
    line = tok.line()
    s = tok.next("sense")
    if s not in SENSES:
        raise CertificateParseError(f"bad sense {s!r}", line)
    return s


def _parse_terms(tok: _Tokens) -> List[Tuple[int, Fraction]]:
    k = tok.count("number of terms")
    return [(tok.integer("line index"), tok.rational()) for _ in range(k)]


def _parse_reason(tok: _Tokens, n: int) -> Reason:
    tok.expect("{")
    line = tok.line()
    kind = tok.next("reason")
    if kind == "asm":
        reason = Reason("asm")
    elif kind in ("lin", "rnd"):
        reason = Reason(kind, _parse_terms(tok))
    elif kind == "uns":
        reason = Reason("uns", unsplit=tuple(tok.integer("line index") for _ in range(4)))
    elif kind == "weak":
        terms = _parse_terms(tok)
        reason = Reason("weak", terms, aggregate=_parse_coefs(tok, n))
    else:
        raise CertificateParseError(f"unknown reason {kind!r}", line)
    tok.expect("}")
    return reason


def parse_certificate(text: Union[str, bytes]) -> Certificate:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    tok = _Tokens(text)
    tok.expect("VER")
    tok.next("version")
    tok.expect("VAR")
    n = tok.count("number of variables")
    names = [tok.next("variable name") for _ in range(n)]
    tok.expect("INT")
    ints = []
    for _ in range(tok.count("number of integer variables")):
        line = tok.line()
        j = tok.integer("variable index")
        if not 0 <= j < n:
            raise CertificateParseError(f"variable index {j} out of range", line)
        ints.append(j)
    tok.expect("OBJ")
    tok.expect("min")
    objective = _parse_coefs(tok, n)
    tok.expect("CON")
    m = tok.count("number of constraints")
    constraints = []
    for _ in range(m):
        name = tok.next("constraint name")
        sense = _parse_sense(tok)
        rhs = tok.rational()
        constraints.append(Constraint(name, sense, rhs, _parse_coefs(tok, n)))
    tok.expect("RTP")
    line = tok.line()
    kind = tok.next("infeas or range")
    if kind == "infeas":
        rtp: Tuple = ("infeas",)
    elif kind == "range":
        rtp = ("range", tok.bound(), tok.bound())
    else:
        raise CertificateParseError(f"bad RTP {kind!r}", line)
    tok.expect("SOL")
    solutions = []
    for _ in range(tok.count("number of solutions")):
        name = tok.next("solution name")
        solutions.append((name, _parse_coefs(tok, n)))
    tok.expect("DER")
    derivations = []
    for k in range(tok.count("number of derivations")):
        line = tok.line()
        idx = tok.integer("derivation index")
        if idx != m + k:
            raise CertificateParseError(f"derivation index {idx}, expected {m + k}", line)
        name = tok.next("derivation name")
        sense = _parse_sense(tok)
        rhs = tok.rational()
        coefs = _parse_coefs(tok, n)
        derivations.append(Derivation(Constraint(name, sense, rhs, coefs), _parse_reason(tok, n)))
    if not tok.done():
        raise CertificateParseError("trailing content", tok.line())
    return Certificate(names, ints, objective, constraints, rtp, solutions, derivations)
