import itertools

import pytest

from metacoeff import bisector_from_q_short, build_cover, build_root_datum, dual_datum
from metacoeff.cover import dual_period, gl_bisector, metaplectic_class
from metacoeff.errors import MetacoeffError
from metacoeff.exactlin import IntMatrix, rational_solve

from conftest import gl2_cover, sl2_cover, sp4_cover


def _span_contains(basis, y):
    sol = rational_solve(basis.tolist(), list(y)) if basis.cols else None
    return sol is not None and all(x.denominator == 1 for x in sol)


@pytest.mark.parametrize("n", range(1, 9))
def test_sl2_n_alpha_and_index(n):
    c = sl2_cover(n)
    assert c.simple_n(0) == n
    assert c.quotient.index == n // (2 if n % 2 == 0 else 1)


def test_gl2_form_values():
    c = gl2_cover(3)
    assert c.Q((1, -1)) == -1
    assert c.B((1, 0), (0, 1)) == 1
    assert c.quotient.index == 9


def test_sp4_long_root_n():
    for n in range(1, 9):
        c = sp4_cover(n)
        # alpha_1 coroot is long (Q = 2), alpha_2 coroot is short (Q = 1)
        assert c.simple_n(0) == n // (2 if n % 2 == 0 else 1)
        assert c.simple_n(1) == n


COVERS = [
    ("SL2", None, 1, n) for n in (1, 2, 3, 4, 6)
] + [("C", 2, 1, n) for n in (2, 3, 4, 6)] + [("A", 2, 1, n) for n in (2, 3, 4)] + [("G2", None, 1, n) for n in (2, 3)]


def _cover(family, rank, q, n):
    d = build_root_datum(family, rank) if rank else build_root_datum(family)
    return build_cover(d, bisector_from_q_short(d, q), n)


@pytest.mark.parametrize("family,rank,q,n", COVERS)
def test_yqn_matches_brute_force(family, rank, q, n):
    c = _cover(family, rank, q, n)
    yqn, sc = c.lattices
    r = c.datum.rank
    basis = [tuple(int(i == j) for j in range(r)) for i in range(r)]
    box = range(-4, 5) if r <= 2 else range(-2, 3)
    for y in itertools.product(box, repeat=r):
        in_yqn = all(c.B(y, b) % n == 0 for b in basis)
        assert _span_contains(yqn, y) == in_yqn
    for i in range(c.datum.semisimple_rank):
        cv = c.datum.simple_coroots[i]
        assert _span_contains(sc, tuple(c.simple_n(i) * x for x in cv))
    for v in sc.columns():
        assert _span_contains(yqn, v)


@pytest.mark.parametrize("family,rank,q,n", COVERS)
def test_yqn_is_weyl_stable(family, rank, q, n):
    c = _cover(family, rank, q, n)
    yqn = c.lattices[0]
    for i in range(c.datum.semisimple_rank):
        for v in yqn.columns():
            assert _span_contains(yqn, c.datum.reflect(i, v))


def test_sl2_yqn_examples():
    odd = sl2_cover(3)
    assert odd.lattices[0].columns() == [(3,)] and odd.lattices[1].columns() == [(3,)]
    even = sl2_cover(6)
    assert even.lattices[0].columns() == [(3,)] and even.lattices[1].columns() == [(6,)]


def test_gl2_yqn_is_n_y():
    c = gl2_cover(4)
    assert c.quotient.elementary_divisors == (4, 4)


def test_dual_of_sl2():
    assert dual_datum(sl2_cover(1)).pi1_order == 2
    dd = dual_datum(sl2_cover(2))
    assert dd.center_divisors == (2,) and dd.pi1_order == 1


def test_dual_at_n1_is_langlands_dual():
    d = build_root_datum("B", 3)
    dd = dual_datum(build_cover(d, bisector_from_q_short(d, 1), 1))
    assert dd.cartan_type == "C3"
    assert dd.pi1_order == 2 and dd.center_order == 1


@pytest.mark.parametrize("r", [2, 3])
def test_so_odd_dual_types(r):
    d = build_root_datum("SOodd", r)
    D = bisector_from_q_short(d, -2)
    for n in range(1, 9):
        dd = dual_datum(build_cover(d, D, n))
        if n % 4:
            assert dd.cartan_type == f"C{r}" and dd.pi1_order == 1
        else:
            assert dd.cartan_type == f"B{r}" and dd.pi1_order == 2


def test_rho_qn_pairs_to_one():
    from fractions import Fraction

    for n in (2, 3, 4):
        c = sp4_cover(n)
        dd = dual_datum(c)
        for a in dd.modified_roots:
            assert sum(Fraction(x) * y for x, y in zip(a, dd.rho_qn)) == 1


def test_metaplectic_class():
    assert str(metaplectic_class(sl2_cover(2))) == "METAPLECTIC(alpha_1)"
    assert metaplectic_class(sp4_cover(6)).metaplectic
    assert not metaplectic_class(sp4_cover(4)).metaplectic
    for fam in ("A", "D", "E6"):
        d = build_root_datum(fam, 4) if fam in ("A", "D") else build_root_datum(fam)
        for n in range(1, 9):
            assert not metaplectic_class(build_cover(d, bisector_from_q_short(d, 1), n)).metaplectic


def test_dual_period():
    sl2 = build_root_datum("SL2")
    # dual alternates between PGL_2 (n odd) and SL_2 (n even)
    assert dual_period(sl2, bisector_from_q_short(sl2, 1), 32).period == 2
    assert dual_period(sl2, IntMatrix.from_rows([[0]]), 8).period == 1
    sp4 = build_root_datum("C", 2)
    assert dual_period(sp4, bisector_from_q_short(sp4, 1), 40).period <= 8


def test_dual_period_needs_semisimple():
    with pytest.raises(MetacoeffError) as e:
        dual_period(build_root_datum("GL", 2), gl_bisector(2, 0, 1), 8)
    assert e.value.code == "SEMISIMPLE_REQUIRED"


def test_non_invariant_form_rejected():
    d = build_root_datum("A", 2)
    with pytest.raises(MetacoeffError) as e:
        build_cover(d, IntMatrix.from_rows([[1, 0], [0, 0]]), 3)
    assert e.value.code == "NOT_WEYL_INVARIANT"
