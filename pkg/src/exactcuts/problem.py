"""MIP data model, the ``.prob`` text format and a brute-force oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .rational_core import INF, format_rational, is_finite, parse_bound, parse_rational

Bound = Union[Fraction, float]
SENSES = ("<=", ">=", "=")


class ProblemError(ValueError):
    pass


class ProblemParseError(ProblemError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OracleUnavailable(ProblemError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    lower: Bound = Fraction(0)
    upper: Bound = INF
    is_integer: bool = False

    def __post_init__(self):
        if is_finite(self.lower) and is_finite(self.upper) and self.lower > self.upper:
            raise ProblemError(f"variable {self.name}: lower bound exceeds upper bound")


@dataclass(frozen=True)
class Row:
    coefs: Dict[int, Fraction]
    sense: str
    rhs: Fraction
    name: str = ""

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ProblemError(f"unknown sense {self.sense!r}")
        object.__setattr__(self, "coefs", {j: Fraction(c) for j, c in sorted(self.coefs.items()) if c != 0})
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    def activity(self, x: Sequence) -> Fraction:
        return sum((c * x[j] for j, c in self.coefs.items()), Fraction(0))

    def satisfied_by(self, x: Sequence) -> bool:
        act = self.activity(x)
        if self.sense == "<=":
            return act <= self.rhs
        if self.sense == ">=":
            return act >= self.rhs
        return act == self.rhs


@dataclass(frozen=True)
class LeRow:
    """A row in ``<=`` form, remembering where it came from.

    ``origin`` is ``(row index, sign)``: the row equals ``sign`` times the
    original row, so ``sign == -1`` marks the negated half of a ``>=`` or
    ``=`` row.
    """

    coefs: Dict[int, Fraction]
    rhs: Fraction
    origin: Tuple[int, int]
    name: str = ""


@dataclass
class Problem:
    variables: List[Variable]
    rows: List[Row] = field(default_factory=list)
    objective: Dict[int, Fraction] = field(default_factory=dict)
    name: str = "problem"

    def __post_init__(self):
        n = len(self.variables)
        names = set()
        for v in self.variables:
            if v.name in names:
                raise ProblemError(f"duplicate variable name {v.name!r}")
            names.add(v.name)
        for r in self.rows:
            for j in r.coefs:
                if not 0 <= j < n:
                    raise ProblemError(f"row {r.name!r} references variable index {j}")
        for j in self.objective:
            if not 0 <= j < n:
                raise ProblemError(f"objective references variable index {j}")
        self.objective = {j: Fraction(c) for j, c in sorted(self.objective.items()) if c != 0}

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def integer_indices(self) -> List[int]:
        return [j for j, v in enumerate(self.variables) if v.is_integer]

    def bounds(self) -> List[Tuple[Bound, Bound]]:
        """Global bounds, rounded inwards for integer variables."""
        out = []
        for v in self.variables:
            lo, up = v.lower, v.upper
            if v.is_integer:
                if is_finite(lo):
                    lo = Fraction(math.ceil(lo))
                if is_finite(up):
                    up = Fraction(math.floor(up))
            out.append((lo, up))
        return out

    def le_rows(self) -> List[LeRow]:
        out = []
        for i, r in enumerate(self.rows):
            if r.sense in ("<=", "="):
                out.append(LeRow(dict(r.coefs), r.rhs, (i, 1), r.name))
            if r.sense in (">=", "="):
                out.append(LeRow({j: -c for j, c in r.coefs.items()}, -r.rhs, (i, -1), r.name))
        return out

    def objective_value(self, x: Sequence) -> Fraction:
        return sum((c * Fraction(x[j]) for j, c in self.objective.items()), Fraction(0))

    def is_feasible(self, x: Sequence, check_integrality: bool = True) -> bool:
        for j, v in enumerate(self.variables):
            xj = Fraction(x[j])
            if is_finite(v.lower) and xj < v.lower:
                return False
            if is_finite(v.upper) and xj > v.upper:
                return False
            if check_integrality and v.is_integer and xj.denominator != 1:
                return False
        return all(r.satisfied_by(x) for r in self.rows)

    def index_of(self, name: str) -> int:
        for j, v in enumerate(self.variables):
            if v.name == name:
                return j
        raise KeyError(name)


def check_assumption_bounds(problem: Problem, support: Iterable[int], bounds=None) -> bool:
    """Every variable in ``support`` has at least one finite bound."""
    if bounds is None:
        bounds = [(v.lower, v.upper) for v in problem.variables]
    return all(is_finite(bounds[j][0]) or is_finite(bounds[j][1]) for j in support)


# --------------------------------------------------------------------------
# text format

def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_problem(text: Union[str, bytes], name: str = "problem") -> Problem:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()
    pos = 0

    def next_content() -> Tuple[int, str]:
        nonlocal pos
        while pos < len(lines):
            raw = lines[pos]
            pos += 1
            s = _strip(raw)
            if s:
                return pos, s
        raise ProblemParseError("unexpected end of file", pos)

    lineno, s = next_content()
    tok = s.split()
    if tok[0] != "VAR" or len(tok) != 2 or not tok[1].isdigit():
        raise ProblemParseError("expected 'VAR <n>'", lineno)
    variables: List[Variable] = []
    index: Dict[str, int] = {}
    for _ in range(int(tok[1])):
        lineno, s = next_content()
        tok = s.split()
        if len(tok) != 4 or tok[3] not in ("int", "cont"):
            raise ProblemParseError("expected '<name> <lower> <upper> <int|cont>'", lineno)
        if tok[0] in index:
            raise ProblemParseError(f"duplicate variable name {tok[0]!r}", lineno)
        try:
            lo, up = parse_bound(tok[1]), parse_bound(tok[2])
        except ValueError as exc:
            raise ProblemParseError(str(exc), lineno) from None
        if lo == INF or up == -INF:
            raise ProblemParseError("infinite bound on the wrong side", lineno)
        try:
            var = Variable(tok[0], lo, up, tok[3] == "int")
        except ProblemError as exc:
            raise ProblemParseError(str(exc), lineno) from None
        index[tok[0]] = len(variables)
        variables.append(var)

    lineno, s = next_content()
    if s.split() != ["OBJ", "min"]:
        raise ProblemParseError("expected 'OBJ min'", lineno)
    objective: Dict[int, Fraction] = {}
    while pos < len(lines):
        raw = lines[pos]
        s = _strip(raw)
        if not raw.strip():
            pos += 1
            break
        if s.startswith("CON"):
            break
        pos += 1
        if not s:
            continue
        tok = s.split()
        if len(tok) != 2 or tok[0] not in index:
            raise ProblemParseError("expected '<varname> <coef>' in objective", pos)
        if index[tok[0]] in objective:
            raise ProblemParseError(f"duplicate objective term {tok[0]!r}", pos)
        try:
            objective[index[tok[0]]] = parse_rational(tok[1])
        except ValueError as exc:
            raise ProblemParseError(str(exc), pos) from None

    lineno, s = next_content()
    tok = s.split()
    if tok[0] != "CON" or len(tok) != 2 or not tok[1].isdigit():
        raise ProblemParseError("expected 'CON <m>'", lineno)
    rows: List[Row] = []
    row_names = set()
    for _ in range(int(tok[1])):
        lineno, s = next_content()
        tok = s.split()
        if len(tok) < 3 or len(tok) % 2 == 0 or tok[1] not in SENSES:
            raise ProblemParseError("expected '<name> <sense> <rhs> {<var> <coef>}*'", lineno)
        if tok[0] in row_names:
            raise ProblemParseError(f"duplicate constraint name {tok[0]!r}", lineno)
        row_names.add(tok[0])
        coefs: Dict[int, Fraction] = {}
        try:
            rhs = parse_rational(tok[2])
            for vname, c in zip(tok[3::2], tok[4::2]):
                if vname not in index:
                    raise ProblemParseError(f"unknown variable {vname!r}", lineno)
                j = index[vname]
                if j in coefs:
                    raise ProblemParseError(f"variable {vname!r} repeated in row", lineno)
                coefs[j] = parse_rational(c)
        except ValueError as exc:
            if isinstance(exc, ProblemParseError):
                raise
            raise ProblemParseError(str(exc), lineno) from None
        rows.append(Row(coefs, tok[1], rhs, tok[0]))
    while pos < len(lines):
        if _strip(lines[pos]):
            raise ProblemParseError("trailing content after constraints", pos + 1)
        pos += 1
    return Problem(variables, rows, objective, name)


def write_problem(problem: Problem) -> str:
    out = [f"VAR {problem.n}"]
    for v in problem.variables:
        kind = "int" if v.is_integer else "cont"
        out.append(f"{v.name} {format_rational(v.lower)} {format_rational(v.upper)} {kind}")
    out.append("OBJ min")
    for j, c in problem.objective.items():
        out.append(f"{problem.variables[j].name} {format_rational(c)}")
    out.append("")
    out.append(f"CON {len(problem.rows)}")
    for i, r in enumerate(problem.rows):
        terms = " ".join(f"{problem.variables[j].name} {format_rational(c)}" for j, c in r.coefs.items())
        name = r.name or f"c{i}"
        out.append(f"{name} {r.sense} {format_rational(r.rhs)} {terms}".rstrip())
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# brute-force oracle

def _grid_values(lo: Fraction, up: Fraction, integer: bool, g: int) -> List[Fraction]:
    if integer:
        return [Fraction(k) for k in range(math.ceil(lo), math.floor(up) + 1)]
    return [Fraction(k, g) for k in range(math.ceil(lo * g), math.floor(up * g) + 1)]


def _integer_dot(points: np.ndarray, coefs: Dict[int, Fraction], scale: int):
    """``scale * D * (coefs . x)`` as exact integers for ``points = scale * x``.

    Returns ``(values, D)`` with ``D`` the common denominator of ``coefs``.
    """
    den = 1
    for c in coefs.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = {j: int(c * den) for j, c in coefs.items()}
    big = max((abs(v) for v in ints.values()), default=0)
    reach = int(np.abs(points).max()) if points.size else 0
    if big * max(reach, 1) * max(len(ints), 1) < 2 ** 62:
        acc = np.zeros(points.shape[0], dtype=np.int64)
        for j, v in ints.items():
            acc += points[:, j] * v
        return acc, den
    acc = np.zeros(points.shape[0], dtype=object)
    obj = points.astype(object)
    for j, v in ints.items():
        acc = acc + obj[:, j] * v
    return acc, den


def satisfies_row(points: np.ndarray, scale: int, coefs: Dict[int, Fraction], sense: str, rhs: Fraction) -> np.ndarray:
    """Exact row test for every point of ``points / scale`` (boolean mask)."""
    act, den = _integer_dot(points, {j: Fraction(c) for j, c in coefs.items()}, scale)
    bound = Fraction(rhs) * den * scale
    if sense == "<=":
        return act <= math.floor(bound)
    if sense == ">=":
        return act >= math.ceil(bound)
    if bound.denominator != 1:
        return np.zeros(points.shape[0], dtype=bool)
    return act == int(bound)


def feasible_grid(problem: Problem, grid_denominator: int = 1, cap: int = 10 ** 7) -> np.ndarray:
    """All feasible grid points, scaled by ``grid_denominator`` to integers.

    Integer variables range over all integers in their bounds, continuous ones
    over multiples of ``1/grid_denominator``.
    """
    if grid_denominator < 1:
        raise ValueError("grid_denominator must be positive")
    g = grid_denominator
    axes = []
    size = 1
    for v in problem.variables:
        if not (is_finite(v.lower) and is_finite(v.upper)):
            raise OracleUnavailable(f"variable {v.name} is unbounded")
        vals = [int(x * g) for x in _grid_values(Fraction(v.lower), Fraction(v.upper), v.is_integer, g)]
        axes.append(np.array(vals, dtype=np.int64))
        size *= len(vals)
        if size > cap:
            raise OracleUnavailable(f"grid has more than {cap} points")
    if size == 0:
        return np.zeros((0, problem.n), dtype=np.int64)
    if not axes:
        return np.zeros((1, 0), dtype=np.int64)
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    keep = np.ones(points.shape[0], dtype=bool)
    for r in problem.rows:
        keep &= satisfies_row(points, g, r.coefs, r.sense, r.rhs)
        points, keep = points[keep], keep[keep]
    return points


def enumerate_feasible(problem: Problem, grid_denominator: int = 1, cap: int = 10 ** 7) -> Iterator[Tuple[Fraction, ...]]:
    """Yield every feasible grid point as a tuple of rationals."""
    g = grid_denominator
    for row in feasible_grid(problem, g, cap):
        yield tuple(Fraction(int(v), g) for v in row)


def brute_force_optimum(problem: Problem, grid_denominator: int = 1) -> Optional[Tuple[Fraction, Tuple[Fraction, ...]]]:
    """Minimum objective over the feasible grid, or ``None`` when it is empty."""
    g = grid_denominator
    points = feasible_grid(problem, g)
    if points.shape[0] == 0:
        return None
    vals, den = _integer_dot(points, problem.objective, g)
    k = int(np.argmin(vals)) if vals.dtype != object else min(range(len(vals)), key=lambda i: vals[i])
    best = tuple(Fraction(int(v), g) for v in points[k])
    return problem.objective_value(best), best
