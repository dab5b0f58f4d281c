import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from exactcuts.generate import GeneratorConfig, generate_battery, random_instance
from exactcuts.problem import Problem, Row, Variable
from exactcuts.rational_core import is_representable, round_down, round_up
from exactcuts.safe_cuts import (
    AT_MOST,
    LOWER,
    UPPER,
    AssumptionViolated,
    FRow,
    NoCut,
    SeparatorConfig,
    best_approx,
    choose_bound_sides,
    exact_slack_corrections,
    limit_denominators,
    make_representable,
    safe_aggregate,
    safe_mir,
    scale_cut,
    separate_gmi,
    substitute_slacks,
)
from exactcuts.simplex import solve_float
from oracles import cut_is_valid, lp_of, violated_points

F = Fraction
INF = math.inf
THIRD_DOWN = F(round_down(F(1, 3)))
THIRD_UP = F(round_up(F(1, 3)))


def implies_on_grid(old, new, box, step=F(1, 4)):
    """Every grid point of ``box`` satisfying ``old`` satisfies ``new``."""
    axes = []
    for lo, up in box:
        k = int((up - lo) / step)
        axes.append([lo + i * step for i in range(k + 1)])
    for x in itertools.product(*axes):
        def holds(row):
            coefs, rhs = row
            return sum(F(c) * x[j] for j, c in coefs.items()) <= F(rhs)

        if holds(old):
            assert holds(new), x


# ---------------------------------------------------------------- representable rows

def test_make_representable_lower_side():
    row = make_representable({0: F(1, 3)}, F(1), [(F(0), INF)], {0: LOWER})
    assert F(row.coefs[0]) == THIRD_DOWN and row.rhs == 1.0


def test_make_representable_upper_side():
    row = make_representable({0: F(1, 3)}, F(1), [(F(0), F(3))], {0: UPPER})
    assert F(row.coefs[0]) == THIRD_UP
    assert row.rhs == round_up(1 + (THIRD_UP - THIRD_DOWN) * 3)
    implies_on_grid(({0: F(1, 3)}, F(1)), (row.coefs, row.rhs), [(F(0), F(3))], F(1, 64))


def test_make_representable_fixed_point():
    row = make_representable({0: F(1, 2), 1: F(-3)}, F(5, 4), [(F(0), INF)] * 2, {0: LOWER, 1: LOWER})
    assert row.coefs == {0: 0.5, 1: -3.0} and row.rhs == 1.25


def test_make_representable_needs_a_bound():
    with pytest.raises(AssumptionViolated):
        make_representable({0: F(1, 3)}, F(1), [(-INF, INF)], {})


@given(
    st.dictionaries(st.integers(0, 2), st.fractions(-5, 5, max_denominator=50), min_size=1),
    st.fractions(-5, 5, max_denominator=50),
    st.lists(st.sampled_from([LOWER, UPPER]), min_size=3, max_size=3),
)
def test_make_representable_is_a_representable_relaxation(coefs, rhs, sides):
    box = [(F(-1), F(2))] * 3
    row = make_representable(coefs, rhs, box, dict(enumerate(sides)))
    assert all(is_representable(v) for v in row.coefs.values()) and is_representable(row.rhs)
    implies_on_grid((coefs, rhs), (row.coefs, row.rhs), box, F(1, 2))


# ---------------------------------------------------------------- aggregation

def test_aggregate_exact_case():
    rows = [({0: 1.0, 1: 1.0}, 1.0), ({0: 1.0, 1: -1.0}, 1.0)]
    agg = safe_aggregate(rows, [1.0, 1.0], [(F(0), INF)] * 2, {0: LOWER, 1: LOWER}, with_slacks=False)
    assert agg.coefs == {0: 2.0} and agg.rhs == 2.0


def test_aggregate_tiny_contribution_rounds_down_on_lower_side():
    rows = [({1: 1.0}, 1.0), ({1: 2.0 ** -60}, 0.0)]
    agg = safe_aggregate(rows, [1.0, 1.0], [(F(0), INF)] * 2, {1: LOWER}, with_slacks=False)
    assert agg.coefs == {1: 1.0} and agg.rhs == 1.0


def test_aggregate_weak_domination_toy_rows():
    # 3 x1 - 4 x2 <= 2 and -x1 + 6 x2 <= 3 with weights 1/3 and 1 give (14/3) x2 <= 11/3 exactly
    rows = [({0: 3.0, 1: -4.0}, 2.0), ({0: -1.0, 1: 6.0}, 3.0)]
    box = [(F(0), F(10)), (F(0), F(4))]
    agg = safe_aggregate(rows, [1 / 3, 1.0], box, {0: LOWER, 1: LOWER}, with_slacks=False)
    assert abs(F(agg.coefs[1]) - F(14, 3)) < F(1, 10 ** 14)
    assert F(agg.coefs[1]) <= F(1, 3) * -4 + 6 + F(1, 10 ** 15)
    assert abs(F(agg.rhs) - F(11, 3)) < F(1, 10 ** 14)
    for x1 in range(0, 11):
        for x2 in [F(k, 4) for k in range(17)]:
            if 3 * x1 - 4 * x2 <= 2 and -x1 + 6 * x2 <= 3:
                assert sum(F(c) * (x1, x2)[j] for j, c in agg.coefs.items()) <= F(agg.rhs)


def test_aggregate_records_slacks():
    rows = [({0: 1.0}, 1.0), ({0: 1.0, 1: 1.0}, 2.0)]
    agg = safe_aggregate(rows, [-0.5, 1.0], [(F(0), INF)] * 2, {0: LOWER, 1: LOWER}, [True, False])
    assert agg.slack_terms == {0: (-0.5, True), 1: (1.0, False)}


def test_bound_sides():
    assert choose_bound_sides([0], [(F(0), INF)]) == {0: LOWER}
    assert choose_bound_sides([0], [(F(0), F(10))], [9.5]) == {0: UPPER}
    assert choose_bound_sides([0], [(F(0), F(10))], [5.0]) == {0: LOWER}
    assert choose_bound_sides([0], [(-INF, F(3))], [0.0]) == {0: UPPER}
    assert choose_bound_sides([0], [(-INF, INF)], [0.0]) == {}


# ---------------------------------------------------------------- MIR

def test_mir_two_variable_instance():
    # w - u <= 5/2, w integer in [-2, 4], u >= 0
    frow = FRow({0: 1.0, 1: -1.0}, 2.5)
    bounds = [(F(-2), F(4)), (F(0), INF)]
    struct, slack, rhs, data = safe_mir(frow, [True, False], bounds, {0: LOWER, 1: LOWER})
    assert data.f == F(1, 2)
    assert struct == {0: 1.0, 1: -2.0} and rhs == 2.0 and slack == {}
    for w in range(-2, 5):
        for u in [F(k, 4) for k in range(0, 21)]:
            if w - u <= F(5, 2):
                assert w - 2 * u <= 2


def test_mir_split_variable_instance():
    # (3/2) x1 + x2 + yp - ym <= 7/2 with x integer, yp, ym >= 0 continuous
    frow = FRow({0: 1.5, 1: 1.0, 2: 1.0, 3: -1.0}, 3.5)
    bounds = [(F(0), F(4)), (F(0), F(4)), (F(0), F(3)), (F(0), F(3))]
    sides = {j: LOWER for j in range(4)}
    struct, _, rhs, data = safe_mir(frow, [True, True, False, False], bounds, sides)
    assert (data.f, data.f_int[0], data.f_int[1]) == (F(1, 2), F(1, 2), F(0))
    assert struct == {0: 1.0, 1: 1.0, 3: -2.0} and rhs == 3.0
    base = Problem(
        [Variable("x1", F(0), F(4), True), Variable("x2", F(0), F(4), True),
         Variable("yp", F(0), F(3)), Variable("ym", F(0), F(3))],
        [Row({0: F(3, 2), 1: F(1), 2: F(1), 3: F(-1)}, "<=", F(7, 2))],
    )
    assert violated_points(base, [({j: F(c) for j, c in struct.items()}, F(rhs))], g=4) == 0
    assert cut_is_valid(base, {j: F(c) for j, c in struct.items()}, F(rhs))


def test_integral_row_gives_no_cut_or_itself():
    frow = FRow({0: 2.0, 1: -3.0}, 4.0)
    bounds = [(F(0), F(5))] * 2
    with pytest.raises(NoCut):
        safe_mir(frow, [True, True], bounds, {0: LOWER, 1: LOWER})
    struct, _, rhs, _ = safe_mir(frow, [True, True], bounds, {0: LOWER, 1: LOWER}, f_min=0.0)
    assert struct == {0: 2.0, 1: -3.0} and rhs == 4.0


def test_slack_substitution_exact_when_representable():
    out = substitute_slacks({0: 1.0}, {0: 0.5}, 2.0, {0: ({0: 1.0, 1: 1.0}, 3.0)}, [(F(0), F(3))] * 2, {0: LOWER, 1: LOWER})
    assert out.coefs == {0: 0.5, 1: -0.5} and out.rhs == 0.5


def test_slack_substitution_with_third_is_a_relaxation():
    c = round_down(F(1, 3))
    box = [(F(0), F(3))] * 2
    out = substitute_slacks({0: 1.0}, {0: c}, 2.0, {0: ({0: 1.0, 1: 1.0}, 3.0)}, box, {0: LOWER, 1: LOWER})
    exact = ({0: 1 - F(c), 1: -F(c)}, 2 - 3 * F(c))
    implies_on_grid(exact, (out.coefs, out.rhs), box, F(1, 8))
    assert F(out.rhs) >= exact[1]


def test_slack_corrections_are_exact_minus_safe():
    # -0.1 / (1 - 1/4) is not representable, so the safe slack coefficient is rounded
    frow = FRow({0: 1.0}, 2.25, slack_terms={0: (-0.1, False)})
    _, slack, _, data = safe_mir(frow, [True], [(F(0), F(5))], {0: LOWER})
    corr = exact_slack_corrections(data)
    key = ("s", 0)
    assert corr[0] == data.exact_coefs[key] - F(data.safe_coefs[key]) and corr[0] >= 0
    assert F(slack[0]) == F(data.safe_coefs[key])


# ---------------------------------------------------------------- post-processing

def test_equilibrium_scaling_is_exact():
    res = scale_cut({0: F(2), 1: F(4)}, F(8), [True, False], [(F(0), INF)] * 2, {0: LOWER, 1: LOWER})
    assert (res.coefs, res.rhs, res.factor, res.integral) == ({0: F(1, 2), 1: F(1)}, F(2), F(1, 4), False)


def test_integral_scaling_rounds_rhs_down():
    res = scale_cut({0: F(1, 2), 1: F(1, 4)}, F(3, 5), [True, True], [(F(0), F(9))] * 2, {0: LOWER, 1: LOWER})
    assert res.integral and res.factor == 4
    assert res.coefs == {0: F(2), 1: F(1)} and res.unrounded_rhs == F(12, 5) and res.rhs == 2
    for x in range(10):
        for y in range(10):
            if F(1, 2) * x + F(1, 4) * y <= F(3, 5):
                assert 2 * x + y <= 2


def test_integral_scaling_falls_back_when_multiple_is_too_large():
    coefs = {0: F(1, 99991), 1: F(1, 99989)}
    res = scale_cut(coefs, F(1, 1000), [True, True], [(F(0), F(9))] * 2, {0: LOWER, 1: LOWER})
    assert not res.integral
    assert res.factor == 2 ** round(-math.log2(float(F(1, 99989))))


@given(st.dictionaries(st.integers(0, 3), st.floats(-1e6, 1e6).filter(lambda v: abs(v) > 1e-200), min_size=1),
       st.floats(-1e6, 1e6).filter(lambda v: v == 0 or abs(v) > 1e-200))
def test_power_of_two_scaling_has_no_error(coefs, rhs):
    exact = {j: F(c) for j, c in coefs.items()}
    res = scale_cut(exact, F(rhs), [False] * 4, [(F(0), INF)] * 4, {j: LOWER for j in range(4)})
    assert res.factor.numerator == 1 or res.factor.denominator == 1
    assert res.coefs == {j: c * res.factor for j, c in exact.items()}
    assert res.rhs == F(rhs) * res.factor


def test_limit_denominators_near_third():
    a = F(6004799503160661, 2 ** 54)
    coefs, rhs = limit_denominators({0: a}, F(1), 2 ** 17, [(F(0), INF)])
    assert coefs[0] == best_approx(a, 2 ** 17, AT_MOST) and coefs[0] <= a
    assert coefs[0].denominator <= 2 ** 17 and rhs >= 1
    for x in range(0, 4000, 7):
        if a * x <= 1:
            assert coefs[0] * x <= rhs


def test_limit_denominators_integer_cut_unchanged():
    assert limit_denominators({0: F(3), 1: F(-2)}, F(5), 7, [(F(0), F(9))] * 2) == ({0: F(3), 1: F(-2)}, F(5))


def test_limit_denominators_to_integers():
    coefs = {0: F(7, 3), 1: F(-5, 4)}
    box = [(F(0), F(4)), (F(-2), F(3))]
    new, rhs = limit_denominators(coefs, F(5, 2), 1, box)
    assert all(c.denominator == 1 for c in new.values()) and rhs.denominator == 1
    implies_on_grid((coefs, F(5, 2)), (new, rhs), box, F(1, 2))


@given(st.dictionaries(st.integers(0, 2), st.fractions(-4, 4, max_denominator=10 ** 6), min_size=1),
       st.fractions(-4, 4, max_denominator=10 ** 6), st.integers(1, 60))
def test_limit_denominators_is_a_relaxation(coefs, rhs, M):
    box = [(F(0), INF), (F(-1), F(2)), (-INF, F(1))]
    new, new_rhs = limit_denominators(coefs, rhs, M, box)
    assert all(c.denominator <= M for c in new.values()) and new_rhs.denominator <= M
    finite_box = [(F(0), F(3)), (F(-1), F(2)), (F(-2), F(1))]
    implies_on_grid((coefs, rhs), (new, new_rhs), finite_box, F(1, 2))


# ---------------------------------------------------------------- separator

def test_no_cuts_when_lp_is_integral():
    p = Problem([Variable("x", F(0), F(3), True)], [Row({0: F(1)}, "<=", F(2))], {0: F(-1)})
    lp = lp_of(p)
    assert separate_gmi([True], lp, solve_float(lp)) == []


def test_knapsack_cut_separates_vertex(knapsack):
    lp = lp_of(knapsack)
    res = solve_float(lp)
    cuts = separate_gmi([True, True], lp, res)
    assert cuts
    for cut in cuts:
        assert cut.efficacy > 0
        act = sum(float(c) * res.primal[j] for j, c in cut.coefs.items())
        assert act > float(cut.rhs)
    assert violated_points(knapsack, [(c.coefs, c.rhs) for c in cuts]) == 0


def test_free_variable_rows_are_skipped():
    p = Problem(
        [Variable("x", F(0), F(5), True), Variable("z", -INF, INF)],
        [Row({0: F(2), 1: F(-1)}, "<=", F(3)), Row({1: F(1)}, "<=", F(2)), Row({1: F(1)}, ">=", F(-1))],
        {0: F(-1)},
    )
    lp = lp_of(p)
    for cut in separate_gmi([True, False], lp, solve_float(lp)):
        assert 1 not in cut.coefs


@given(st.integers(0, 10 ** 6), st.booleans(), st.sampled_from([0, 2 ** 17, 16]))
def test_every_separated_cut_is_valid(seed, mixed, max_denom):
    p = random_instance(random.Random(seed), GeneratorConfig(max_vars=4), mixed, "v")
    lp = lp_of(p)
    res = solve_float(lp)
    cuts = separate_gmi([v.is_integer for v in p.variables], lp, res, SeparatorConfig(max_denominator=max_denom))
    for cut in cuts:
        assert cut_is_valid(p, cut.coefs, cut.rhs)
        if max_denom:
            assert all(c.denominator <= max_denom for c in cut.coefs.values())


def test_cuts_sorted_and_limited():
    cfg = SeparatorConfig(max_cuts_per_round=2)
    for p in generate_battery(2, 30):
        lp = lp_of(p)
        cuts = separate_gmi([v.is_integer for v in p.variables], lp, solve_float(lp), cfg)
        assert len(cuts) <= 2
        assert [c.efficacy for c in cuts] == sorted((c.efficacy for c in cuts), reverse=True)
