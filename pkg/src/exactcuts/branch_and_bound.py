"""Exact LP-based branch-and-bound with root safe-cut rounds.

Every node LP is solved in exact arithmetic, so each prune is backed by an
exact dual bound or an exact Farkas proof.  The search keeps a record of the
tree and of the cuts that entered the LP so that a certificate can be
written afterwards.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .problem import Problem, ProblemError
from .safe_cuts import Cut, SeparatorConfig, separate_gmi
from .simplex import INFEASIBLE, OPTIMAL, LpRelaxation, LpResult, solve_exact, solve_float

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_LIMIT = "time-limit"


class SolveError(ProblemError):
    """The solver hit a case it cannot decide (unbounded LP, LP iteration limit)."""


class UndefinedGap(ValueError):
    pass


@dataclass
class SolverConfig:
    cuts: bool = True
    separator: SeparatorConfig = field(default_factory=SeparatorConfig)
    node_limit: int = 100000
    time_limit: float = math.inf
    # keep per-leaf LP data for certificate writing
    record_tree: bool = False


@dataclass
class Node:
    id: int
    local_bounds: Dict[int, Tuple[Fraction, Fraction]]
    depth: int = 0
    parent: Optional[int] = None
    # (variable, "down" | "up", bound value) of the branch that created the node
    branch: Optional[Tuple[int, str, Fraction]] = None
    exact_dual_bound: object = -math.inf


@dataclass
class TreeRecord:
    """What happened at one node, for certificate writing."""

    node: Node
    kind: str = "open"  # "bound", "infeasible", "empty", "branch"
    lp: Optional[LpRelaxation] = None
    result: Optional[LpResult] = None
    children: List[int] = field(default_factory=list)


@dataclass
class SolveResult:
    status: str
    incumbent: Optional[Tuple[Fraction, ...]] = None
    objective: Optional[Fraction] = None
    dual_bound: object = -math.inf
    node_count: int = 0
    cuts_added: int = 0
    root_bound_before: object = None
    root_bound_after: object = None
    cuts: List[Cut] = field(default_factory=list)
    n_base_rows: int = 0
    tree: Dict[int, TreeRecord] = field(default_factory=dict)
    times: Dict[str, float] = field(default_factory=dict)


def gap_closed(p, d1, d2) -> Fraction:
    """Fraction of the gap between ``d1`` and the reference ``p`` closed by ``d2``."""
    p, d1, d2 = Fraction(p), Fraction(d1), Fraction(d2)
    if p == d1:
        raise UndefinedGap("reference objective equals the first dual bound")
    gc = (d2 - d1) / (p - d1)
    return min(max(gc, Fraction(0)), Fraction(1))


def fractional_part(v) -> Fraction:
    v = Fraction(v)
    return v - math.floor(v)


def choose_branch_var(point, integer_indices) -> Optional[int]:
    """Most fractional integer variable, smallest index on ties."""
    best, best_score = None, Fraction(0)
    for j in integer_indices:
        f = fractional_part(point[j])
        score = min(f, 1 - f)
        if score > best_score:
            best, best_score = j, score
    return best


def branch(node: Node, point, integer_indices, next_id) -> Tuple[Node, Node]:
    j = choose_branch_var(point, integer_indices)
    if j is None:
        raise ValueError("no fractional integer variable")
    v = math.floor(Fraction(point[j]))
    lo, up = node.local_bounds[j]
    down_bounds = dict(node.local_bounds)
    down_bounds[j] = (lo, Fraction(v))
    up_bounds = dict(node.local_bounds)
    up_bounds[j] = (Fraction(v + 1), up)
    down = Node(next_id(), down_bounds, node.depth + 1, node.id, (j, "down", Fraction(v)))
    upn = Node(next_id(), up_bounds, node.depth + 1, node.id, (j, "up", Fraction(v + 1)))
    return down, upn


class _Clock:
    def __init__(self):
        self.start = time.perf_counter()
        self.parts: Dict[str, float] = {"exact_lp": 0.0, "float_lp": 0.0, "separation": 0.0}

    def timed(self, key, fn, *args):
        t = time.perf_counter()
        try:
            return fn(*args)
        finally:
            self.parts[key] += time.perf_counter() - t

    def elapsed(self) -> float:
        return time.perf_counter() - self.start


def _exact(clock: _Clock, lp: LpRelaxation) -> LpResult:
    res = clock.timed("exact_lp", solve_exact, lp)
    if res.status not in (OPTIMAL, INFEASIBLE):
        raise SolveError(f"exact LP returned {res.status}")
    return res


def _is_integral(point, integer_indices) -> bool:
    return all(Fraction(point[j]).denominator == 1 for j in integer_indices)


def root_cut_rounds(problem: Problem, lp: LpRelaxation, config: SolverConfig, clock: _Clock) -> List[Cut]:
    integrality = [v.is_integer for v in problem.variables]
    ints = problem.integer_indices
    cuts: List[Cut] = []
    current = lp
    for _ in range(config.separator.rounds):
        res = clock.timed("float_lp", solve_float, current)
        if res.status != OPTIMAL:
            break
        if all(abs(v - round(v)) <= 1e-9 for v in (res.primal[j] for j in ints)):
            break
        new = clock.timed("separation", separate_gmi, integrality, current, res, config.separator)
        if not new:
            break
        cuts.extend(new)
        current = current.with_rows([(c.coefs, c.rhs) for c in new])
    return cuts


def solve(problem: Problem, config: Optional[SolverConfig] = None) -> SolveResult:
    config = config or SolverConfig()
    clock = _Clock()
    bounds = problem.bounds()
    base_rows = [(r.coefs, r.rhs) for r in problem.le_rows()]
    lp = LpRelaxation(problem.n, bounds, base_rows, dict(problem.objective))
    ints = problem.integer_indices
    out = SolveResult(STATUS_LIMIT, n_base_rows=len(base_rows))

    root_res = _exact(clock, lp)
    out.root_bound_before = root_res.objective_value if root_res.status == OPTIMAL else math.inf
    cuts: List[Cut] = []
    if config.cuts and root_res.status == OPTIMAL and not _is_integral(root_res.primal, ints):
        cuts = root_cut_rounds(problem, lp, config, clock)
    out.cuts = cuts
    out.cuts_added = len(cuts)
    lp = lp.with_rows([(c.coefs, c.rhs) for c in cuts])

    ids = itertools.count()
    root = Node(next(ids), {j: bounds[j] for j in range(problem.n)})
    heap: List[Tuple[object, int, Node]] = [(-math.inf, root.id, root)]
    tree: Dict[int, TreeRecord] = {}
    incumbent, best = None, None
    nodes = 0
    limit_hit = False
    while heap:
        if nodes >= config.node_limit or clock.elapsed() > config.time_limit:
            limit_hit = True
            break
        key, _, node = heapq.heappop(heap)
        nodes += 1
        node_lp = lp.with_bounds([node.local_bounds[j] for j in range(problem.n)])
        res = _exact(clock, node_lp)
        rec = TreeRecord(node)
        tree[node.id] = rec
        if config.record_tree:
            rec.lp, rec.result = node_lp, res
        if node.id == root.id:
            out.root_bound_after = res.objective_value if res.status == OPTIMAL else math.inf
        if res.status == INFEASIBLE:
            rec.kind = "empty" if res.empty_box is not None else "infeasible"
            node.exact_dual_bound = math.inf
            continue
        value = res.objective_value
        node.exact_dual_bound = value
        if best is not None and value >= best:
            rec.kind = "bound"
            continue
        if _is_integral(res.primal, ints):
            point = tuple(Fraction(v) for v in res.primal)
            if not problem.is_feasible(point):
                raise SolveError("integral LP solution violates the original rows")
            incumbent, best = point, value
            rec.kind = "bound"
            continue
        rec.kind = "branch"
        down, up = branch(node, res.primal, ints, lambda: next(ids))
        rec.children = [down.id, up.id]
        heapq.heappush(heap, (value, down.id, down))
        heapq.heappush(heap, (value, up.id, up))
    out.node_count = nodes
    out.tree = tree
    out.incumbent = incumbent
    out.objective = best
    if limit_hit:
        open_bounds = [k for k, _, _ in heap]
        if best is not None:
            open_bounds.append(best)
        out.dual_bound = min(open_bounds)
        out.status = STATUS_LIMIT
    elif incumbent is None:
        out.status = STATUS_INFEASIBLE
        out.dual_bound = math.inf
    else:
        out.status = STATUS_OPTIMAL
        out.dual_bound = best
    out.times = dict(clock.parts, total=clock.elapsed())
    return out
