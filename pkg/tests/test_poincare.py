import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from metacoeff import bisector_from_q_short, build_root_datum
from metacoeff.catalog import family
from metacoeff.cover import gl_bisector
from metacoeff.errors import MetacoeffError
from metacoeff.poincare import (
    LinearRecurrence,
    NoRecurrence,
    Periodic,
    RationalSeries,
    detect_recurrence,
    sweep,
    to_rational_series,
)


def test_sp_sweep_pattern():
    d = build_root_datum("C", 2)
    s = sweep(d, bisector_from_q_short(d, 1), 16)
    assert s.b_seq == (1, 1, 1, 0) * 4
    assert not s.bound_violations


def test_e7_sweep_odd_only():
    d, D = family("E7").build()
    s = sweep(d, D, 8)
    assert s.b_seq == (1, 0) * 4


def test_kp_gl2_sweep_is_n():
    s = sweep(build_root_datum("GL", 2), gl_bisector(2, 0, 1), 10)
    assert s.b_seq == tuple(range(1, 11))


def test_sweep_rejects_short_window():
    d = build_root_datum("SL2")
    with pytest.raises(MetacoeffError) as e:
        sweep(d, bisector_from_q_short(d, 1), 3)
    assert e.value.code == "BAD_ARGUMENT"


def test_sweep_parallel_matches_serial():
    d = build_root_datum("B", 3)
    D = bisector_from_q_short(d, 1)
    assert sweep(d, D, 12, jobs=2) == sweep(d, D, 12)


def test_detect_recurrence_examples():
    assert detect_recurrence([1, 1, 1, 0] * 6) == Periodic(4)
    assert detect_recurrence([1] * 12) == Periodic(1)
    rec = detect_recurrence(list(range(1, 25)))
    assert isinstance(rec, LinearRecurrence) and rec.coeffs == (2, -1)
    assert isinstance(detect_recurrence([1, 5, 2, 9, 3, 3, 7, 1, 0, 4, 8, 6]), NoRecurrence)


def test_rational_forms():
    t = lambda num, den: RationalSeries(tuple(num), tuple(den))
    assert to_rational_series([1, 1, 1, 0] * 6, Periodic(4)).equals(t([0, 1, 1, 1], [1, 0, 0, 0, -1]))
    assert to_rational_series([1] * 10, Periodic(1)).equals(t([0, 1], [1, -1]))
    seq = list(range(1, 13))
    assert to_rational_series(seq, detect_recurrence(seq)).equals(t([0, 1], [1, -2, 1]))


def test_so_odd_series():
    f = family("SO7")
    d, D = f.build()
    s = sweep(d, D, 24)
    found = to_rational_series(s.b_seq, detect_recurrence(s.b_seq))
    assert found.equals(RationalSeries((0, 1, 1, 1, 2), (1, 0, 0, 0, -1)))


def test_b_r_two_mod_four_series():
    d = build_root_datum("B", 6)
    s = sweep(d, bisector_from_q_short(d, 1), 24)
    found = to_rational_series(s.b_seq, detect_recurrence(s.b_seq))
    assert found.equals(RationalSeries((0, 1), (1, 0, -1)))


def test_savin_series_shape():
    f = family("GL3-savin")
    assert f.p_w.to_text() == "(T + T^2 + T^3)/((1 - T^2)^2)"


@given(st.lists(st.integers(0, 5), min_size=1, max_size=6), st.integers(1, 6))
def test_periodic_series_round_trip(block, reps):
    seq = block * (reps + 3)
    rec = detect_recurrence(seq)
    assert rec
    series = to_rational_series(seq, rec)
    assert series.expand(len(seq)) == seq


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=5), st.lists(st.integers(-3, 3), max_size=4))
def test_series_json_round_trip(num, tail):
    s = RationalSeries(tuple(num), (1, *tail))
    back = RationalSeries.from_json(json.loads(json.dumps(s.to_json())))
    assert back == s and back.equals(s)


def test_equals_is_cross_multiplication():
    a = RationalSeries((0, 1), (1, -1))
    b = RationalSeries((0, 1, 1), (1, 0, -1))
    assert a.equals(b)
    assert not a.equals(RationalSeries((0, 1), (1, 0, -1)))
