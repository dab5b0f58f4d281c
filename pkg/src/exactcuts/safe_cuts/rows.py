"""Data carried through the safe cut pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Tuple

UPPER = "U"
LOWER = "L"


class CutAbandoned(Exception):
    """A safe step could not produce a finite, valid row."""


class AssumptionViolated(CutAbandoned):
    """A variable in the support has no finite bound on the side required."""


class NoCut(Exception):
    """The base row gives no MIR cut (fractionality out of range)."""


@dataclass
class FRow:
    """``coefs x + sum slack_mult_r s_r <= rhs`` with every scalar in F.

    ``slack_terms`` maps an LP row index to ``(multiplier, treat_integer)``.
    """

    coefs: Dict[int, float]
    rhs: float
    sides: Dict[int, str] = field(default_factory=dict)
    slack_terms: Dict[int, Tuple[float, bool]] = field(default_factory=dict)


@dataclass
class AggregationRecord:
    multipliers: Dict[int, float] = field(default_factory=dict)
    bound_multipliers: Dict[int, Fraction] = field(default_factory=dict)
    exact_slack_corrections: Dict[int, Fraction] = field(default_factory=dict)


@dataclass
class MirData:
    """Split information of one MIR step, in the transformed space.

    Keys of the per-variable maps are structural indices ``j`` or
    ``("s", r)`` for the slack of LP row ``r``.
    """

    d: float
    floor_d: int
    f: Fraction
    f_int: Dict[Hashable, Fraction]
    transformed: Dict[Hashable, float]
    exact_coefs: Dict[Hashable, Fraction]
    safe_coefs: Dict[Hashable, float]
    is_integer: Dict[Hashable, bool]
    sides: Dict[Hashable, str]
    ext_bounds: Dict[Hashable, Tuple[object, object]]

    @property
    def n1(self) -> List[Hashable]:
        return [v for v, integral in self.is_integer.items() if integral and self.f_int[v] <= self.f]

    @property
    def n2(self) -> List[Hashable]:
        return [v for v, integral in self.is_integer.items() if integral and self.f_int[v] > self.f]


@dataclass
class Cut:
    """A cut ``coefs x <= rhs`` in exact rational form plus its provenance."""

    coefs: Dict[int, Fraction]
    rhs: Fraction
    mir: Optional[MirData] = None
    base: Optional[FRow] = None
    aggregation: AggregationRecord = field(default_factory=AggregationRecord)
    # LP rows used as slacks: index -> (relaxed coefs, relaxed rhs)
    slack_rows: Dict[int, Tuple[Dict[int, float], float]] = field(default_factory=dict)
    scaling_factor: Fraction = Fraction(1)
    integral_scaled: bool = False
    # rhs before the final round-down of integral scaling
    unrounded_rhs: Optional[Fraction] = None
    denominator_limited: bool = False
    efficacy: float = 0.0
    source_var: Optional[int] = None

    def activity(self, x) -> Fraction:
        return sum((c * Fraction(x[j]) for j, c in self.coefs.items()), Fraction(0))

    def is_satisfied_by(self, x) -> bool:
        return self.activity(x) <= self.rhs


def ext_sort_key(v) -> Tuple[int, int]:
    """Structural variables first, then slacks, each ascending."""
    if isinstance(v, tuple):
        return (1, v[1])
    return (0, v)
