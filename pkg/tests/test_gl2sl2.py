import pytest

from metacoeff.errors import MetacoeffError
from metacoeff.gl2sl2 import (
    Explicit4Variant,
    TameSquareClassGroup,
    dualcenter_check,
    dualhilbert_check,
    explicit4_matrix,
    explicit4_ramified_pattern,
    explicit4_trace_expected,
    gl2_det_trace_verify,
    identity_suite,
    kp_constants,
    restriction_blocks,
    twisted_det4,
    unramified_det4,
    v,
    whittaker_dimension,
)


def test_constants():
    k = kp_constants(6, 0)
    assert (k.n_c, k.d, k.d_c) == (6, 3, 3)
    k = kp_constants(5, 1)
    assert (k.n_c, k.d, k.d_c) == (1, 5, 1)
    k = kp_constants(9, 2)
    assert (k.n_c, k.d, k.d_c) == (1, 9, 1)
    with pytest.raises(MetacoeffError):
        kp_constants(0, 0)


@pytest.mark.parametrize(
    "n,c,count,size",
    [(6, 0, 12, 3), (3, 0, 3, 3), (5, 1, 1, 5), (4, 0, 8, 2), (8, 0, 16, 4), (12, 2, 8, 6)],
)
def test_blocks(n, c, count, size):
    b = restriction_blocks(kp_constants(n, c))
    assert (b.block_count, b.block_size) == (count, size)


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("c", [0, 1, -1, 2])
def test_blocks_fill_whittaker_space(n, c):
    assert restriction_blocks(kp_constants(n, c)).dimension == whittaker_dimension(n, c)


@pytest.mark.parametrize("n", [4, 8])
def test_explicit4(n):
    d = n // 2
    vd = v() ** d
    m0 = explicit4_matrix(n)
    m1 = explicit4_matrix(n, Explicit4Variant.TWIST_BY_VARPI_INVERSE)
    assert m0.size == d
    assert m0.det() == unramified_det4(n, vd)
    assert m1.det() == twisted_det4(n, vd)
    assert m0.trace() == explicit4_trace_expected(n)
    assert all(m1[i, i].is_zero() for i in range(d))


def test_explicit4_needs_0_mod_4():
    with pytest.raises(MetacoeffError) as e:
        explicit4_matrix(6)
    assert e.value.code == "NOT_0_MOD_4"


def test_ramified_pattern_is_monomial():
    for n, cond in ((4, 1), (8, 1), (8, 3)):
        pat = explicit4_ramified_pattern(n, cond)
        assert sorted(i for i, _ in pat) == list(range(n // 2))
        assert sorted(j for _, j in pat) == list(range(n // 2))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7, 8, 10, 12])
@pytest.mark.parametrize("c", [0, 1])
def test_gl2_det_trace(n, c):
    res = gl2_det_trace_verify(n, c)
    assert res.ok, res.steps


@pytest.mark.parametrize("n", range(1, 9))
def test_tame_model(n):
    g = TameSquareClassGroup(n)
    for m in (m for m in range(1, n + 1) if n % m == 0):
        assert g.index(m) == m * m
        assert g.is_perfect(m) and g.is_antisymmetric(m)
        assert g.is_lagrangian(g.lagrangian_K(m), m)
        assert dualhilbert_check(g, m)
        for l in (l for l in range(1, n // m + 1) if (n // m) % l == 0):
            assert dualcenter_check(g, m, l)


def test_identity_suite():
    bad = [r for r in identity_suite() if not r.ok]
    assert not bad
