import json

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from metacoeff.errors import MetacoeffError
from metacoeff.symbolic import (
    ONE,
    ZERO,
    Qi,
    R,
    SymExpr,
    SymMatrix,
    eps_symbol,
    gauss,
    omega,
    parse,
    sym_det,
    torus,
)

FREE_LEAVES = [Qi(), R(), torus(0), torus(1), SymExpr.const(2), SymExpr.const(-3)]
ALL_LEAVES = FREE_LEAVES + [gauss(3, 1), gauss(5, 2), omega(), SymExpr.sign("h"), eps_symbol(8, 3)]


def exprs(leaves):
    base = st.sampled_from(leaves)

    def grow(children):
        pairs = st.tuples(children, children)
        return st.one_of(
            pairs.map(lambda p: p[0] + p[1]),
            pairs.map(lambda p: p[0] - p[1]),
            pairs.map(lambda p: p[0] * p[1]),
            children.map(lambda a: a / (1 - torus(0))),
        )

    return st.recursive(base, grow, max_leaves=6)


def test_gauss_relations():
    assert gauss(3, 1) * gauss(3, 2) == Qi()
    assert gauss(3, 0) == -Qi()
    assert gauss(4, 2) == Qi() * R() * omega()
    assert gauss(4, 1) * gauss(4, -1) == Qi()


def test_epsilon_relations():
    z, x = SymExpr.gen("Z"), SymExpr.gen("x")
    assert eps_symbol(4, 1) * eps_symbol(4, 3) == Qi() * z**-2 * x**-2
    assert eps_symbol(4, 0) == ONE
    assert eps_symbol(4, 2) == R() ** -1 * z**-1 * x**-1 * omega()


def test_sign_symbols_square_to_one():
    assert omega() * omega() == ONE
    assert SymExpr.sign("h") ** 2 == ONE
    assert omega() != ONE and omega() != -ONE


def test_qi_is_r_to_minus_two():
    assert R() ** 2 * Qi() == ONE


@given(exprs(ALL_LEAVES))
def test_text_round_trip(e):
    assert parse(e.to_text()) == e


@given(exprs(ALL_LEAVES))
def test_json_round_trip(e):
    assert parse(json.loads(json.dumps(e.to_json()))["expr"]) == e


@settings(max_examples=25)
@given(exprs(FREE_LEAVES), exprs(FREE_LEAVES))
def test_to_sympy_is_a_ring_map(a, b):
    assert sympy.simplify((a * b).to_sympy() - a.to_sympy() * b.to_sympy()) == 0
    assert sympy.simplify((a + b).to_sympy() - a.to_sympy() - b.to_sympy()) == 0


@given(exprs(ALL_LEAVES))
def test_rendering_is_deterministic(e):
    assert e.to_text() == parse(e.to_text()).to_text()
    assert e.to_latex() == parse(e.to_text()).to_latex()


@settings(max_examples=20)
@given(st.lists(st.lists(exprs(FREE_LEAVES), min_size=3, max_size=3), min_size=3, max_size=3))
def test_det_matches_sympy(rows):
    ours = sym_det([list(r) for r in rows])
    oracle = sympy.Matrix([[v.to_sympy() for v in r] for r in rows]).det()
    assert sympy.simplify(ours.to_sympy() - oracle) == 0


def test_det_with_signs_branchwise():
    m = [[omega(), Qi()], [ONE, omega()]]
    assert sym_det(m) == ONE - Qi()


def test_matrix_json_round_trip():
    m = SymMatrix([(0,), (1,)], [[Qi(), gauss(3, 1)], [omega() / (1 - torus(0)), ZERO]])
    back = SymMatrix.from_json(json.loads(json.dumps(m.to_json())))
    assert back == m and back.labels == m.labels


def test_matrix_product_and_trace():
    a = SymMatrix([(0,), (1,)], [[ONE, torus(0)], [ZERO, ONE]])
    b = a @ a
    assert b.entry((0,), (1,)) == 2 * torus(0)
    assert b.trace() == SymExpr.const(2)
    assert b.det() == ONE


@pytest.mark.parametrize("text", ["foo+", "t1/0", "qq*2"])
def test_parse_errors(text):
    with pytest.raises(MetacoeffError):
        parse(text)


def test_division_by_zero():
    with pytest.raises(MetacoeffError) as e:
        Qi() / ZERO
    assert e.value.code == "DIVISION_BY_ZERO"
