"""Seeded random instances small enough for the enumeration oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List

from .problem import Problem, Row, Variable

# small rationals; 1/3, 1/7 and 2/3 are not binary64-representable
COEF_POOL = [
    Fraction(1), Fraction(2), Fraction(3), Fraction(4), Fraction(5),
    Fraction(1, 2), Fraction(3, 2), Fraction(1, 3), Fraction(2, 3),
    Fraction(1, 7), Fraction(5, 7), Fraction(7, 3), Fraction(5, 4),
]


@dataclass
class GeneratorConfig:
    min_vars: int = 2
    max_vars: int = 6
    max_rows: int = 8
    # probability that a variable is continuous in a mixed instance
    continuous_share: float = 0.35
    max_int_width: int = 4
    max_cont_width: int = 3
    density: float = 0.7


def _coef(rng: random.Random) -> Fraction:
    c = rng.choice(COEF_POOL)
    return -c if rng.random() < 0.4 else c


def random_instance(rng: random.Random, config: GeneratorConfig, mixed: bool = False, name: str = "inst") -> Problem:
    """Bounded instance whose rows pass near the middle of the box.

    Row right-hand sides are set from a random interior point so the LP
    relaxation is usually feasible but the integer problem is tight.
    """
    n = rng.randint(config.min_vars, config.max_vars)
    variables: List[Variable] = []
    for j in range(n):
        integer = not (mixed and rng.random() < config.continuous_share)
        if integer:
            lo = rng.randint(-1, 0)
            up = lo + rng.randint(1, config.max_int_width)
        else:
            lo = rng.choice([0, 0, -1])
            up = lo + rng.randint(1, config.max_cont_width)
        variables.append(Variable(f"x{j}", Fraction(lo), Fraction(up), integer))
    if mixed and all(v.is_integer for v in variables):
        v = variables[-1]
        variables[-1] = Variable(v.name, v.lower, v.upper, False)
    if mixed and not any(v.is_integer for v in variables):
        v = variables[0]
        variables[0] = Variable(v.name, v.lower, v.upper, True)
    m = rng.randint(1, config.max_rows)
    rows = []
    for i in range(m):
        coefs = {j: _coef(rng) for j in range(n) if rng.random() < config.density}
        if not coefs:
            j = rng.randrange(n)
            coefs[j] = _coef(rng)
        centre = sum(c * (variables[j].lower + variables[j].upper) / 2 for j, c in coefs.items())
        slack = Fraction(rng.randint(0, 7), rng.choice([2, 3, 4, 7]))
        sense = rng.choice(["<=", "<=", "<=", ">="])
        rhs = centre + slack if sense == "<=" else centre - slack
        rows.append(Row(coefs, sense, rhs, f"c{i}"))
    objective = {j: _coef(rng) for j in range(n) if rng.random() < 0.8}
    return Problem(variables, rows, objective, name)


def generate_battery(seed: int, count: int, mixed_share: float = 0.3, config: GeneratorConfig = None) -> List[Problem]:
    """``count`` instances, a ``mixed_share`` fraction of them mixed-integer."""
    config = config or GeneratorConfig()
    rng = random.Random(seed)
    out = []
    for k in range(count):
        mixed = rng.random() < mixed_share
        out.append(random_instance(rng, config, mixed, name=f"s{seed}_{k:04d}"))
    return out
