from conftest import g2_cover, gl2_cover, sl2_cover, sp4_cover
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metacoeff.errors import MetacoeffError
from metacoeff.orbits import centered_reps, coset_space
from metacoeff.rootdata import weyl_group
from metacoeff.symbolic import ONE, Qi, SymExpr, SymMatrix, gauss, torus
from metacoeff.symlcm import (
    Character,
    GammaBundle,
    adjoint_gamma_product,
    aux_lemma_check,
    casselman_shalika_check,
    change_basis_det_expected,
    change_basis_matrix,
    character_from_weights,
    det_rhs_T_M1,
    dominant_grid,
    expected_support,
    freudenthal_character,
    local_coeff_matrix,
    scattering_matrix,
    scattering_row,
    trace_closed_form,
    verify_det_T_M1,
    weyl_char_trace,
    whittaker_value,
)

t = torus(0)


def _reps(c):
    return centered_reps(coset_space(c))


def test_sl2_n3_display():
    c = sl2_cover(3)
    reps = _reps(c)
    assert reps == ((0,), (1,), (-1,))
    z = SymExpr.const(0)
    S = scattering_matrix(c, reps, 0)
    assert S == SymMatrix(reps, [
        [(1 - Qi()) / (1 - t), gauss(3, 2), z],
        [gauss(3, 1), (1 - Qi()) * t / (1 - t), z],
        [z, z, (1 - Qi() / t) / (1 - t)],
    ])
    C = change_basis_matrix(c, reps, 0)
    o = ONE
    assert C == SymMatrix(reps, [[o, z, z], [z, z, o], [z, o, z]])
    M = local_coeff_matrix(c, reps, 0)
    assert M == SymMatrix(reps, [
        [(1 - Qi()) / (1 - t), z, gauss(3, 2)],
        [gauss(3, 1), z, (1 - Qi()) * t / (1 - t)],
        [z, (1 - Qi() / t) / (1 - t), z],
    ])


@pytest.mark.parametrize("n", range(1, 9))
def test_det_sl2(n):
    assert verify_det_T_M1(sl2_cover(n), 0).ok


@pytest.mark.parametrize("n", range(1, 6))
def test_det_gl2(n):
    c = gl2_cover(n)
    assert verify_det_T_M1(c, 0).ok


@pytest.mark.parametrize("n,alpha", [(n, a) for n in range(1, 5) for a in (0, 1)])
def test_det_sp4(n, alpha):
    assert verify_det_T_M1(sp4_cover(n), alpha).ok


@pytest.mark.parametrize("alpha", [0, 1])
def test_det_g2(alpha):
    assert verify_det_T_M1(g2_cover(2), alpha).ok


@pytest.mark.parametrize("n", range(1, 13))
def test_sl2_trichotomy(n):
    c = sl2_cover(n)
    g = GammaBundle.of(c, 0)
    det = local_coeff_matrix(c, None, 0).det()
    if n % 2:
        expected = g.plancherel_inv ** ((n - 1) // 2) * g.gamma_inv
    elif (n // 2) % 2:
        expected = g.plancherel_inv ** ((n // 2 - 1) // 2) * g.meta_gamma_inv
    else:
        expected = -(t ** -1) * g.plancherel_inv ** (n // 4)
    assert det == expected


@pytest.mark.parametrize("n", range(1, 6))
def test_gl2_uniform_det(n):
    c = gl2_cover(n)
    g = GammaBundle.of(c, 0)
    assert local_coeff_matrix(c, None, 0).det() == g.plancherel_inv ** ((n * n - n) // 2) * g.gamma_inv**n


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cocycle_sp4(n):
    c = sp4_cover(n)
    d = c.datum
    chi = Character.base(c)
    lhs = scattering_matrix(c, None, d.element((0, 1)), chi)
    rhs = scattering_matrix(c, None, 1, chi) @ scattering_matrix(c, None, 0, chi.twist(d.simple_reflection(1)))
    assert lhs == rhs


@pytest.mark.parametrize("n", [2, 3])
def test_cocycle_g2_longer_word(n):
    c = g2_cover(n)
    d = c.datum
    chi = Character.base(c)
    lhs = scattering_matrix(c, None, d.element((1, 0, 1)), chi)
    w1 = scattering_matrix(c, None, d.element((0, 1)), chi)
    w2 = scattering_matrix(c, None, 1, chi.twist(d.element((0, 1))))
    assert lhs == w1 @ w2


@pytest.mark.parametrize("cover", [sl2_cover(2), sl2_cover(5), gl2_cover(3), sp4_cover(3)])
def test_plancherel_composition(cover):
    d = cover.datum
    chi = Character.base(cover)
    for i in range(d.semisimple_rank):
        s1 = scattering_matrix(cover, None, i, chi)
        s2 = scattering_matrix(cover, None, i, chi.twist(d.simple_reflection(i)))
        g = GammaBundle.of(cover, i, chi)
        reps = s1.labels
        assert s1 @ s2 == SymMatrix.identity(reps).scale(g.plancherel_inv)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_scattering_row_matches_matrix(n):
    c = sp4_cover(n)
    w = c.datum.element((0, 1, 0))
    S = scattering_matrix(c, None, w)
    for r in range(S.size):
        row = scattering_row(c, None, w, r)
        assert {j: S[r, j] for j in range(S.size) if not S[r, j].is_zero()} == row


@settings(max_examples=15)
@given(st.integers(2, 7), st.randoms(use_true_random=False))
def test_basis_independence(n, rnd):
    c = sl2_cover(n)
    reps = list(coset_space(c).require_reps())
    base = local_coeff_matrix(c, reps, 0).det()
    rnd.shuffle(reps)
    assert local_coeff_matrix(c, reps, 0).det() == base
    assert local_coeff_matrix(c, _reps(c), 0).det() == base


@pytest.mark.parametrize("cover", [sl2_cover(4), sl2_cover(6), gl2_cover(3), sp4_cover(3), sp4_cover(4)])
def test_support_and_change_basis(cover):
    for reps in (coset_space(cover).require_reps(), _reps(cover)):
        for a in range(cover.datum.semisimple_rank):
            M = local_coeff_matrix(cover, reps, a)
            assert M.support() <= expected_support(cover, reps, a)
            assert change_basis_matrix(cover, reps, a).det() == change_basis_det_expected(cover, reps, a)


@pytest.mark.parametrize("n", range(1, 9))
def test_trace_closed_form(n):
    c = sl2_cover(n)
    assert local_coeff_matrix(c, None, 0).trace() == trace_closed_form(c)


@pytest.mark.parametrize("n", range(2, 10))
def test_aux_lemma(n):
    assert aux_lemma_check(n)


def test_aux_lemma_rejects_small():
    with pytest.raises(MetacoeffError):
        aux_lemma_check(1)


@pytest.mark.parametrize("cover", [sl2_cover(3), sl2_cover(5), gl2_cover(2), gl2_cover(3), sp4_cover(3)])
def test_casselman_shalika(cover):
    assert casselman_shalika_check(cover).ok


def test_whittaker_sl2_n3_value():
    c = sl2_cover(3)
    from metacoeff.orbits import exceptional_set

    z = exceptional_set(c).point()
    assert z == (-1,)
    val = whittaker_value(c, z, (0,), include_delta=True)
    assert val == (1 - Qi() * t) * Qi()


@pytest.mark.parametrize("cover", [sp4_cover(3), g2_cover(1)])
def test_weyl_character_vs_freudenthal(cover):
    W = weyl_group(cover.datum)
    for y in dominant_grid(cover, 4):
        oracle = character_from_weights(cover, freudenthal_character(cover, y, group=W))
        assert weyl_char_trace(cover, y, group=W) == oracle


@pytest.mark.parametrize("cover,theta", [(sp4_cover(3), (0,)), (sp4_cover(3), (1,)), (gl2_cover(3), ()), (sl2_cover(5), ())])
def test_adjoint_gamma(cover, theta):
    assert adjoint_gamma_product(cover, theta).ok


def test_adjoint_requires_maximal():
    with pytest.raises(MetacoeffError):
        adjoint_gamma_product(sp4_cover(3), ())


def test_epsilon_unsupported():
    with pytest.raises(MetacoeffError) as e:
        scattering_matrix(sl2_cover(3), None, 0, eps=-1)
    assert e.value.code == "EPSILON_UNSUPPORTED"


def test_bad_reps():
    with pytest.raises(MetacoeffError) as e:
        local_coeff_matrix(sl2_cover(3), [(0,), (3,), (1,)], 0)
    assert e.value.code == "BAD_REPRESENTATIVES"


def test_det_rhs_matches_lhs():
    c = sl2_cover(4)
    assert det_rhs_T_M1(c, 0) == verify_det_T_M1(c, 0).lhs
