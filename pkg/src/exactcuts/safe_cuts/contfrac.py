"""Continued fractions and best rational approximations with a denominator limit."""

from __future__ import annotations

from functools import lru_cache
from fractions import Fraction
from typing import List, Tuple

TWO_SIDED = "two_sided"
AT_MOST = "at_most"
AT_LEAST = "at_least"
DIRECTIONS = (TWO_SIDED, AT_MOST, AT_LEAST)


def partial_quotients(r: Fraction) -> List[int]:
    r = Fraction(r)
    terms = []
    num, den = r.numerator, r.denominator
    while den:
        q = num // den
        terms.append(q)
        num, den = den, num - q * den
    return terms


def convergents(terms: List[int]) -> List[Tuple[int, int]]:
    """``(p_i, q_i)`` for every prefix of ``terms``."""
    out = []
    p_prev, q_prev = 1, 0
    p, q = terms[0], 1
    out.append((p, q))
    for a in terms[1:]:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


def intermediate_fraction(conv: List[Tuple[int, int]], i: int, j: int) -> Fraction:
    """The fraction ``(j p_i + p_{i-1}) / (j q_i + q_{i-1})``."""
    p, q = conv[i]
    p_prev, q_prev = conv[i - 1] if i > 0 else (1, 0)
    return Fraction(j * p + p_prev, j * q + q_prev)


@lru_cache(maxsize=4096)
def _convergents_of(num: int, den: int) -> Tuple[Tuple[int, int], ...]:
    return tuple(convergents(partial_quotients(Fraction(num, den))))


def best_approx(r: Fraction, max_denominator: int, direction: str = TWO_SIDED) -> Fraction:
    """Best approximation of ``r`` with denominator at most ``max_denominator``.

    ``at_most`` and ``at_least`` restrict the answer to one side of ``r``.
    Only the last admissible convergent and the intermediate fraction with the
    largest admissible denominator are ever compared.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be positive")
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    r = Fraction(r)
    n, d = r.numerator, r.denominator
    if d <= max_denominator:
        return r
    conv = _convergents_of(n, d)
    k = 0
    while conv[k + 1][1] <= max_denominator:
        k += 1
    p_k, q_k = conv[k]
    p_prev, q_prev = conv[k - 1] if k > 0 else (1, 0)
    j = (max_denominator - q_prev) // q_k
    p_i, q_i = j * p_k + p_prev, j * q_k + q_prev
    # even-index convergents lie below r, odd ones above; the intermediate
    # fraction sits on the side of the next convergent
    last_below = k % 2 == 0
    if direction == AT_MOST:
        p, q = (p_k, q_k) if last_below else (p_i, q_i)
    elif direction == AT_LEAST:
        p, q = (p_i, q_i) if last_below else (p_k, q_k)
    else:
        # compare |p/q - n/d| by cross multiplication
        err_last = abs(p_k * d - n * q_k) * q_i
        err_inter = abs(p_i * d - n * q_i) * q_k
        if err_inter < err_last or (err_inter == err_last and q_i < q_k):
            p, q = p_i, q_i
        else:
            p, q = p_k, q_k
    return Fraction(p, q)


def brute_force_table(r: Fraction, max_denominator: int) -> List[Tuple[Fraction, Fraction, Fraction]]:
    """Exhaustive reference for :func:`best_approx`.

    Entry ``M - 1`` holds the (two_sided, at_most, at_least) answers for the
    limit ``M``.  Ties go to the smaller denominator.
    """
    r = Fraction(r)
    n, d = r.numerator, r.denominator
    best = {TWO_SIDED: None, AT_MOST: None, AT_LEAST: None}

    def err(pq):
        return abs(pq[0] * d - n * pq[1]), pq[1]

    def better(a, b):
        # |a - r| < |b - r|, compared exactly
        ea, qa = err(a)
        eb, qb = err(b)
        return ea * qb < eb * qa

    table = []
    for q in range(1, max_denominator + 1):
        lo = ((n * q) // d, q)
        hi = (-((-n * q) // d), q)
        for key, cands in ((AT_MOST, (lo,)), (AT_LEAST, (hi,)), (TWO_SIDED, (lo, hi))):
            for c in cands:
                if best[key] is None or better(c, best[key]):
                    best[key] = c
        table.append(tuple(Fraction(*best[k]) for k in DIRECTIONS))
    return table


def brute_force_approx(r: Fraction, max_denominator: int, direction: str = TWO_SIDED) -> Fraction:
    return brute_force_table(r, max_denominator)[-1][DIRECTIONS.index(direction)]
