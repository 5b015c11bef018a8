from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from metacoeff import bisector_from_q_short, build_cover, build_root_datum, dual_datum
from metacoeff.errors import MetacoeffError
from metacoeff.exactlin import rational_inverse
from metacoeff.orbits import (
    CosetKind,
    alpha_counts,
    centered_reps,
    classify,
    coset_space,
    enumerated_counts,
    exceptional_set,
    fixed_count_bW,
    fixed_points,
    perm_sign,
    twisted,
    twisted_act,
)
from metacoeff.rootdata import weyl_group

from conftest import g2_cover, gl2_cover, sl2_cover, sp4_cover


def test_sl2_n3_space_and_centered_reps():
    s = coset_space(sl2_cover(3))
    assert s.d == 3
    assert centered_reps(s) == ((0,), (1,), (-1,))


@pytest.mark.parametrize("n", range(1, 6))
def test_gl2_counts(n):
    c = gl2_cover(n)
    s = coset_space(c)
    assert s.d == n * n
    b, a = alpha_counts(c, 0)
    assert (b, a) == (n, (n * n - n) // 2)
    assert perm_sign(s, 0) == (-1) ** a


@pytest.mark.parametrize("n", range(1, 11))
def test_sl2_fixed_count(n):
    c = sl2_cover(n)
    d = c.quotient.index
    assert alpha_counts(c, 0)[0] == (1 if d % 2 else 0)


def test_sl2_twisted_action_is_one_minus_y():
    c = sl2_cover(5)
    s = coset_space(c)
    w = c.datum.simple_reflection(0)
    for y in s.reps:
        assert twisted_act(s, w, y) == s.rep((1 - y[0],))


def test_classify_examples():
    c3 = sl2_cover(3)
    assert classify(c3, 0, (-1,)).kind is CosetKind.NORMAL
    assert classify(c3, 0, (-1,)).pairing == -3
    assert classify(sl2_cover(4), 0, (0,)).kind is CosetKind.FREE
    kinds = {classify(sl2_cover(6), 0, y).kind for y in coset_space(sl2_cover(6)).reps}
    assert CosetKind.SPECIAL in kinds


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9])
def test_sl2_exceptional_point(n):
    ex = exceptional_set(sl2_cover(n))
    assert ex.point() == ((1 - n) // 2,)
    assert ex.image_count == 1


def test_metaplectic_sp4_exceptional_point():
    c = sp4_cover(6)
    d = c.datum
    rho = d.positive.rho
    rho_qn = dual_datum(c).rho_qn
    # fundamental coweights: columns of the inverse of the pairing matrix
    pairing = [[sum(a[k] * e[k] for k in range(2)) for e in ((1, 0), (0, 1))] for a in d.simple_roots]
    inv = rational_inverse(pairing)
    omega_r = [inv[k][1] for k in range(2)]
    expected = tuple(rho[k] - rho_qn[k] + Fraction(c.simple_n(1), 2) * omega_r[k] for k in range(2))
    assert exceptional_set(c).point() == tuple(int(x) for x in expected)


def test_perm_sign_examples():
    assert perm_sign(sl2_cover(3), 0) == -1
    assert perm_sign(sl2_cover(1), 0) == 1


def test_enumeration_cap():
    d = build_root_datum("E8")
    c = build_cover(d, bisector_from_q_short(d, 1), 7)
    s = coset_space(c, 100)
    assert s.reps is None and s.d == 7**8
    with pytest.raises(MetacoeffError) as e:
        s.require_reps()
    assert e.value.code == "CAP_EXCEEDED"
    assert fixed_count_bW(c) == 1


COVER_MAKERS = {
    "SL2": sl2_cover,
    "Sp4": sp4_cover,
    "GL2": gl2_cover,
    "G2": g2_cover,
}


@given(st.sampled_from(sorted(COVER_MAKERS)), st.integers(1, 8))
def test_congruence_counts_match_enumeration(name, n):
    c = COVER_MAKERS[name](n)
    s = coset_space(c)
    e = enumerated_counts(s)
    assert e.b_alpha == tuple(alpha_counts(c, i)[0] for i in range(c.datum.semisimple_rank))
    assert e.b_W == fixed_count_bW(c)
    assert list(e.fixed) == fixed_points(s)


@given(st.sampled_from(["A", "B", "C", "D"]), st.integers(1, 6))
def test_rank3_or4_counts_match_enumeration(fam, n):
    rank = 4 if fam == "D" else 3
    d = build_root_datum(fam, rank)
    c = build_cover(d, bisector_from_q_short(d, 1), n)
    if c.quotient.index > 3000:
        return
    e = enumerated_counts(coset_space(c))
    assert e.b_W == fixed_count_bW(c)
    assert e.b_alpha == tuple(alpha_counts(c, i)[0] for i in range(rank))


@given(st.integers(1, 6), st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
def test_twisted_action_is_a_group_action(n, y):
    c = sp4_cover(n)
    group = weyl_group(c.datum)
    for w1 in group[:4]:
        for w2 in group:
            w12 = c.datum.element(w1.word + w2.word)
            assert twisted(c, w12, y) == twisted(c, w1, twisted(c, w2, y))


@given(st.integers(1, 6))
def test_centered_reps_cover_each_coset_once(n):
    s = coset_space(sp4_cover(n))
    cr = centered_reps(s)
    assert sorted(s.key(y) for y in cr) == sorted(s.key(y) for y in s.reps)
    for a, b in zip(cr, s.reps):
        assert sum(x * x for x in a) <= sum(x * x for x in b)


def test_exceptional_points_are_weyl_fixed():
    for maker, ns in ((sl2_cover, range(1, 9)), (sp4_cover, range(1, 7)), (g2_cover, range(1, 5))):
        for n in ns:
            c = maker(n)
            s = coset_space(c)
            ex = exceptional_set(c)
            fixed = {s.rep(y) for y in fixed_points(s)}
            if not ex.empty:
                assert s.rep(ex.point()) in fixed
            assert ex.image_count <= len(fixed)
