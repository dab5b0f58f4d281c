import logging
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from exactcuts.report import (
    NODE_SHIFT,
    TIME_SHIFT,
    InstanceRecord,
    build_report,
    read_records,
    read_references,
    shifted_geomean,
    to_csv,
    to_table,
    write_references,
)


def _rec(name, root_before, root_after, dual, nodes=1, objective=None, status="optimal", times=None):
    return InstanceRecord(
        name=name,
        status=status,
        objective=objective,
        root_before=Fraction(root_before),
        root_after=Fraction(root_after),
        dual_bound=Fraction(dual),
        nodes=nodes,
        cuts_added=2,
        times=times or {},
    )


def test_shifted_geomean_example():
    # (2 * 8)^(1/2) - 1 = 3
    assert shifted_geomean([1, 7], TIME_SHIFT) == pytest.approx(3.0)
    assert shifted_geomean([], NODE_SHIFT) == 0.0


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=20))
def test_shifted_geomean_bounds(values):
    m = shifted_geomean(values, NODE_SHIFT)
    assert min(values) - 1e-6 <= m <= max(values) + 1e-6 * max(1.0, max(values))


def test_gap_rows():
    refs = {"a": ("optimal", Fraction(10)), "b": ("optimal", Fraction(10))}
    recs = [_rec("a", 0, 5, 10, objective=Fraction(10)), _rec("b", 0, 0, 0, objective=Fraction(10))]
    report = build_report(recs, refs)
    rows = {r.name: r for r in report.rows}
    assert rows["a"].gc_root == Fraction(1, 2)
    assert rows["a"].gc_limit == 1
    assert rows["b"].gc_root == 0


def test_undefined_gap_is_skipped(caplog):
    refs = {"a": ("optimal", Fraction(3))}
    with caplog.at_level(logging.WARNING):
        report = build_report([_rec("a", 3, 3, 3, objective=Fraction(3))], refs)
    assert report.rows == []
    assert report.skipped == [("a", "reference objective equals the root bound")]
    assert "skipping a" in caplog.text


def test_missing_and_disagreeing_references_are_skipped():
    refs = {"b": ("optimal", Fraction(4)), "c": ("infeasible", None)}
    recs = [
        _rec("a", 0, 1, 2, objective=Fraction(2)),
        _rec("b", 0, 1, 2, objective=Fraction(5)),
        _rec("c", 0, 1, 2, objective=Fraction(2)),
    ]
    report = build_report(recs, refs)
    assert report.rows == []
    assert [name for name, _ in report.skipped] == ["a", "b", "c"]


def test_infinite_bounds_clamped():
    refs = {"a": ("optimal", Fraction(4))}
    rec = _rec("a", 0, 1, 2, objective=Fraction(4), status="node_limit")
    rec.dual_bound = math.inf
    report = build_report([rec], refs)
    assert report.rows[0].gc_limit == 1


def test_csv_deterministic_and_means_recomputable(tmp_path):
    refs = {f"i{k}": ("optimal", Fraction(10)) for k in range(4)}
    recs = [_rec(f"i{k}", 0, k, k + 1, nodes=10 * k + 1, objective=Fraction(10)) for k in range(4)]
    for rec in recs:
        (tmp_path / f"{rec.name}.json").write_text(rec.to_json())
    (tmp_path / "ref.csv").write_text(write_references(recs))
    first = to_csv(build_report(read_records(tmp_path), read_references(tmp_path / "ref.csv")))
    second = to_csv(build_report(list(reversed(recs)), refs))
    assert first == second
    report = build_report(recs, refs)
    means = report.means()
    assert means["nodes"] == pytest.approx(shifted_geomean([r.nodes for r in report.rows], NODE_SHIFT))
    assert means["gc_root"] == pytest.approx(float(sum(r.gc_root for r in report.rows) / 4))
    assert "time_total" not in means
    assert "instances 4, skipped 0" in to_table(report)


def test_times_opt_in():
    rec = _rec("a", 0, 1, 2, objective=Fraction(4), times={"total": 1.5})
    assert InstanceRecord.from_json(rec.to_json()).times == {}
    assert InstanceRecord.from_json(rec.to_json(with_times=True)).times == {"total": 1.5}
    report = build_report([rec], {"a": ("optimal", Fraction(4))})
    assert "time_total" not in to_csv(report)
    assert "time_total" in to_csv(report, with_times=True)


def test_record_round_trip():
    rec = _rec("a", Fraction(-7, 3), 1, 2, objective=Fraction(5, 2))
    rec.root_after = -math.inf
    back = InstanceRecord.from_json(rec.to_json())
    assert back == rec
