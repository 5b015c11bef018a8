import pytest
from hypothesis import given
from hypothesis import strategies as st

from metacoeff.catalog import all_families, classical_families, exceptional_families, family, two_exponent


@given(st.integers(1, 10**6))
def test_two_exponent(n):
    j = two_exponent(n)
    assert n % 2**j == 0 and (n // 2**j) % 2 == 1


@pytest.mark.parametrize("fam", all_families(), ids=lambda f: f.name)
def test_series_agree_with_tables(fam):
    n_max = 40
    for table, series in ((fam.b_table, fam.p_w), (fam.exc_table, fam.p_exc)):
        if table is None:
            continue
        assert series.expand(n_max) == [int(table(n)) for n in range(1, n_max + 1)]


def test_a3_row():
    a3 = family("A3")
    assert [a3.b_table(n) for n in range(1, 9)] == [True, True, True, False, True, True, True, False]
    assert [a3.exc_table(n) for n in range(1, 5)] == [True, False, True, False]


def test_a5_row():
    a5 = family("A5")
    assert [a5.b_table(n) for n in range(1, 5)] == [True, False, True, False]


def test_grid_sizes():
    assert len(classical_families()) == 18
    assert [f.name for f in exceptional_families()] == ["E6", "E7", "E8", "F4", "G2"]


def test_kp_series():
    kp = family("GL2-kp")
    assert kp.p_w.expand(5) == [1, 2, 3, 4, 5]
    assert not kp.almost_simple


def test_unknown_family():
    with pytest.raises(KeyError):
        family("H3")
