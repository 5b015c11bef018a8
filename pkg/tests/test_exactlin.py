import itertools
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from metacoeff.errors import MetacoeffError
from metacoeff.exactlin import (
    Empty,
    IntMatrix,
    affine_congruence_solve,
    bareiss_det,
    hermite_columns,
    lattice_basis,
    quotient_structure,
    rational_inverse,
    rational_solve,
    smith_form,
    sublattice_index,
    vec_gcd,
)

entries = st.integers(-6, 6)


def matrices(rows, cols):
    return st.lists(st.lists(entries, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def square(n):
    return matrices(n, n)


@given(st.integers(1, 4).flatmap(square))
def test_bareiss_matches_sympy(rows):
    assert bareiss_det([list(r) for r in rows]) == sympy.Matrix(rows).det()


@given(st.integers(1, 3).flatmap(lambda r: st.integers(1, 4).flatmap(lambda c: matrices(r, c))))
def test_smith_form_factorisation(rows):
    a = IntMatrix.from_rows(rows)
    s = smith_form(a)
    assert s.U @ a @ s.V == s.D
    assert s.U @ s.U_inv == IntMatrix.identity(a.rows)
    diag = s.diagonal
    for i in range(s.D.rows):
        for j in range(s.D.cols):
            if i != j:
                assert s.D[i, j] == 0
    nonzero = [d for d in diag if d]
    assert all(d > 0 for d in nonzero)
    assert all(nonzero[k + 1] % nonzero[k] == 0 for k in range(len(nonzero) - 1))
    assert s.rank == sympy.Matrix(rows).rank()


@given(square(3))
def test_smith_diagonal_product_is_abs_det(rows):
    s = smith_form(IntMatrix.from_rows(rows))
    prod = 1
    for d in s.diagonal:
        prod *= d
    assert prod == abs(sympy.Matrix(rows).det())


def _spans(basis, vectors):
    q = quotient_structure(lattice_sum_of(basis, vectors), basis)
    return q.index == 1


def lattice_sum_of(basis, vectors):
    cols = list(basis.columns()) + [tuple(v) for v in vectors]
    return lattice_basis(IntMatrix.from_columns(cols, nrows=basis.rows))


@given(matrices(3, 4))
def test_hermite_spans_same_lattice(rows):
    a = IntMatrix.from_rows(rows)
    if not any(any(r) for r in rows):
        return
    h = lattice_basis(a)
    assert _spans(h, a.columns())
    assert hermite_columns(a).rows == 3


def test_quotient_of_scaled_lattice():
    sup = IntMatrix.identity(2)
    sub = IntMatrix.from_rows([[2, 0], [0, 6]])
    q = quotient_structure(sup, sub)
    assert q.index == 12
    assert q.elementary_divisors == (2, 6)
    reps = list(q.representatives())
    assert len(reps) == 12
    assert len({q.key(r) for r in reps}) == 12


def test_quotient_infinite_index():
    sup = IntMatrix.identity(2)
    sub = IntMatrix.from_columns([(1, 1)], nrows=2)
    q = quotient_structure(sup, sub)
    assert not q.is_finite


@given(square(2))
def test_quotient_index_is_abs_det(rows):
    det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if det == 0:
        return
    sub = IntMatrix.from_rows(rows)
    assert sublattice_index(IntMatrix.identity(2), sub) == abs(det)


@given(square(2), st.tuples(st.integers(-20, 20), st.integers(-20, 20)))
def test_rep_map_is_canonical(rows, v):
    det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if det == 0:
        return
    q = quotient_structure(IntMatrix.identity(2), IntMatrix.from_rows(rows))
    r = q.rep_map(v)
    assert q.same_coset(r, v)
    assert q.rep_map(r) == r


@given(
    st.tuples(st.integers(-4, 4), st.integers(-4, 4)),
    st.integers(-5, 5),
    st.integers(1, 6),
    st.tuples(st.integers(-4, 4), st.integers(-4, 4)),
    st.integers(-5, 5),
    st.integers(0, 6),
)
def test_congruence_solver_matches_brute_force(f1, o1, m1, f2, o2, m2):
    cons = [(f1, o1, m1), (f2, o2, m2)]
    sol = affine_congruence_solve(cons, IntMatrix.identity(2))

    def ok(y, f, o, m):
        v = f[0] * y[0] + f[1] * y[1] + o
        return v == 0 if m == 0 else v % m == 0

    box = list(itertools.product(range(-8, 9), repeat=2))
    brute = [y for y in box if all(ok(y, *c) for c in cons)]
    if not sol:
        assert brute == []
    else:
        assert [y for y in box if sol.contains(y)] == brute


def test_congruence_solver_inconsistent():
    sol = affine_congruence_solve([((2, 0), 1, 4)], IntMatrix.identity(2))
    assert isinstance(sol, Empty) and not sol


def test_congruence_solver_non_integral_offset():
    sol = affine_congruence_solve([((1, 0), Fraction(1, 2), 3)], IntMatrix.identity(2))
    assert sol.reason == "NON_INTEGRAL_SYSTEM"


def test_congruence_solver_rejects_negative_modulus():
    with pytest.raises(MetacoeffError) as e:
        affine_congruence_solve([((1, 0), 0, -1)], IntMatrix.identity(2))
    assert e.value.code == "BAD_MODULUS"


def test_rational_solve_and_inverse():
    a = [[2, 1], [1, 1]]
    assert list(rational_solve(a, [3, 2])) == [1, 1]
    inv = rational_inverse(a)
    assert [[sum(Fraction(a[i][k]) * inv[k][j] for k in range(2)) for j in range(2)] for i in range(2)] == [[1, 0], [0, 1]]
    assert rational_solve([[1], [1]], [1, 2]) is None


def test_ragged_matrix_rejected():
    with pytest.raises(MetacoeffError) as e:
        IntMatrix(((1, 2), (3,)))
    assert e.value.code == "BAD_MATRIX"


def test_vec_gcd():
    assert vec_gcd([4, 6, -10]) == 2
    assert vec_gcd([0, 0]) == 0
