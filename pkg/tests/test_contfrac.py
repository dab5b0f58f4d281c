import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from exactcuts.safe_cuts.contfrac import (
    AT_LEAST,
    AT_MOST,
    DIRECTIONS,
    TWO_SIDED,
    best_approx,
    brute_force_approx,
    brute_force_table,
    convergents,
    intermediate_fraction,
    partial_quotients,
)


def test_worked_examples():
    r = Fraction(13, 11)
    assert best_approx(r, 4, TWO_SIDED) == Fraction(5, 4)
    assert best_approx(r, 4, AT_MOST) == 1
    assert best_approx(Fraction(3, 7), 100) == Fraction(3, 7)
    for M in (1, 7, 1000):
        assert best_approx(Fraction(-5), M, AT_LEAST) == -5


def test_expansion_and_convergents():
    assert partial_quotients(Fraction(13, 11)) == [1, 5, 2]
    assert convergents([1, 5, 2]) == [(1, 1), (6, 5), (13, 11)]
    assert partial_quotients(Fraction(-7, 3)) == [-3, 1, 2]


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        best_approx(Fraction(1, 3), 0)
    with pytest.raises(ValueError):
        best_approx(Fraction(1, 3), 5, "sideways")


def test_grid_against_brute_force():
    for d in range(1, 61):
        for n in range(-60, 61):
            if math.gcd(n, d) != 1:
                continue
            r = Fraction(n, d)
            table = brute_force_table(r, 20)
            for M in range(1, 21):
                got = tuple(best_approx(r, M, k) for k in DIRECTIONS)
                assert got == table[M - 1], (r, M)


@given(st.fractions(max_denominator=10 ** 9), st.integers(1, 400), st.sampled_from(DIRECTIONS))
def test_random_against_brute_force(r, M, direction):
    got = best_approx(r, M, direction)
    assert got == brute_force_approx(r, M, direction)
    assert got.denominator <= M
    if direction == AT_MOST:
        assert got <= r
    if direction == AT_LEAST:
        assert got >= r


def _intermediate_cases(limit: int):
    for d in range(1, limit + 1):
        for n in range(-limit, limit + 1):
            if math.gcd(n, d) != 1:
                continue
            r = Fraction(n, d)
            terms = partial_quotients(r)
            conv = convergents(terms)
            for i in range(len(terms) - 1):
                a = terms[i + 1]
                base = abs(Fraction(*conv[i]) - r)
                for j in range(1, a):
                    yield r, a, j, abs(intermediate_fraction(conv, i, j) - r) < base


def test_intermediates_above_half_always_beat_the_convergent():
    for _, a, j, better in _intermediate_cases(80):
        if j >= a // 2 + 1:
            assert better


def test_intermediates_below_half_never_beat_the_convergent():
    for _, a, j, better in _intermediate_cases(80):
        if 2 * j < a:
            assert not better


def test_half_threshold_is_exact_for_odd_quotients():
    for _, a, j, better in _intermediate_cases(80):
        if a % 2 == 1 and j == a // 2:
            assert not better


def test_even_quotient_half_case_can_beat_the_convergent():
    # r = -199/3 = [-67; 1, 2]: the j = 1 = a/2 intermediate -133/2 is closer than -66
    r = Fraction(-199, 3)
    conv = convergents(partial_quotients(r))
    assert abs(intermediate_fraction(conv, 1, 1) - r) < abs(Fraction(*conv[1]) - r)
