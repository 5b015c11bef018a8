"""Exact integer and rational linear algebra.

Everything here works on Python integers and :class:`fractions.Fraction`,
so results are exact at any size.  The three public entry points are
:func:`normal_forms` (Hermite and Smith forms), :func:`quotient_structure`
(finite or infinite quotients of lattices with canonical coset
representatives) and :func:`affine_congruence_solve` (mixed systems of
linear congruences and equations over a lattice).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod
from typing import Callable, Iterable, Iterator, Sequence, Union

from .errors import MetacoeffError

Vector = tuple[int, ...]
RatVector = tuple[Fraction, ...]


class _Infinite:
    """Marker for an infinite index."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"


INFINITE = _Infinite()


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored row by row.

    A matrix may have zero columns (the basis of the zero lattice) but
    always has at least one row, so the ambient dimension is never lost.
    """

    entries: tuple[tuple[int, ...], ...]
    ncols: int = -1

    def __post_init__(self) -> None:
        if not self.entries:
            raise MetacoeffError("BAD_MATRIX", "a matrix needs at least one row")
        widths = {len(r) for r in self.entries}
        if len(widths) != 1:
            raise MetacoeffError("BAD_MATRIX", "ragged rows")
        width = widths.pop()
        if self.ncols not in (-1, width):
            raise MetacoeffError("BAD_MATRIX", "column count mismatch")
        object.__setattr__(self, "ncols", width)
        for r in self.entries:
            for x in r:
                if not isinstance(x, int) or isinstance(x, bool):
                    raise MetacoeffError("BAD_MATRIX", f"non-integer entry {x!r}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(x) for x in r) for r in rows))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], nrows: int | None = None) -> "IntMatrix":
        columns = [tuple(int(x) for x in c) for c in columns]
        if not columns:
            if nrows is None:
                raise MetacoeffError("BAD_MATRIX", "empty column list needs nrows")
            return cls(tuple(() for _ in range(nrows)))
        return cls(tuple(zip(*columns)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_columns(self.entries, nrows=self.cols)

    def apply(self, v: Sequence) -> tuple:
        """Matrix times a column vector (integers or fractions)."""
        if len(v) != self.cols:
            raise MetacoeffError("BAD_MATRIX", "dimension mismatch in apply")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self.entries)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise MetacoeffError("BAD_MATRIX", "dimension mismatch in product")
        cols = other.columns()
        return IntMatrix(
            tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.entries),
            ncols=other.cols,
        )

    def det(self) -> int:
        if self.rows != self.cols:
            raise MetacoeffError("BAD_MATRIX", "determinant of a non-square matrix")
        return bareiss_det([list(r) for r in self.entries])

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


def bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free determinant of an integer matrix (modified in place)."""
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Hermite and Smith normal forms


def hermite_columns(m: IntMatrix) -> IntMatrix:
    """Column Hermite normal form: H = m·U with U unimodular.

    H is in column echelon form, pivots are positive and the entries to
    the left of a pivot lie in [0, pivot).  Zero columns sit on the right.
    """
    cols = [list(c) for c in m.columns()]
    nrows, ncols = m.rows, m.cols
    c = 0
    for i in range(nrows):
        if c >= ncols:
            break
        while True:
            nz = [j for j in range(c, ncols) if cols[j][i] != 0]
            if not nz:
                break
            p = min(nz, key=lambda j: abs(cols[j][i]))
            cols[c], cols[p] = cols[p], cols[c]
            done = True
            for j in range(c + 1, ncols):
                if cols[j][i]:
                    q = cols[j][i] // cols[c][i]
                    cols[j] = [a - q * b for a, b in zip(cols[j], cols[c])]
                    if cols[j][i]:
                        done = False
            if done:
                break
        if all(cols[j][i] == 0 for j in range(c, ncols)):
            continue
        if cols[c][i] < 0:
            cols[c] = [-a for a in cols[c]]
        piv = cols[c][i]
        for j in range(c):
            q = cols[j][i] // piv
            if q:
                cols[j] = [a - q * b for a, b in zip(cols[j], cols[c])]
        c += 1
    return IntMatrix.from_columns(cols, nrows=nrows)


@dataclass(frozen=True)
class SmithForm:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix
    V_inv: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.D[i, i] for i in range(min(self.D.rows, self.D.cols)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def smith_form(m: IntMatrix) -> SmithForm:
    """Smith normal form with transforms: U·m·V = D, d_i | d_{i+1}."""
    a = m.tolist()
    nr, nc = m.rows, m.cols
    U = [[int(i == j) for j in range(nr)] for i in range(nr)]
    Ui = [[int(i == j) for j in range(nr)] for i in range(nr)]
    V = [[int(i == j) for j in range(nc)] for i in range(nc)]
    Vi = [[int(i == j) for j in range(nc)] for i in range(nc)]

    # Row ops act on a and U (left), with inverse tracked by the
    # corresponding column op on Ui.  Column ops act on a and V (right),
    # with the inverse tracked by row ops on Vi.
    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]
        for r in Ui:
            r[i], r[j] = r[j], r[i]

    def row_add(dst, src, k):  # row dst += k * row src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]
        for r in Ui:
            r[src] -= k * r[dst]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        U[i] = [-x for x in U[i]]
        for r in Ui:
            r[i] = -r[i]

    def col_swap(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def col_add(dst, src, k):  # col dst += k * col src
        for r in a:
            r[dst] += k * r[src]
        for r in V:
            r[dst] += k * r[src]
        Vi[src] = [x - k * y for x, y in zip(Vi[src], Vi[dst])]

    t = 0
    while t < min(nr, nc):
        nz = [(abs(a[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if a[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        if i != t:
            row_swap(i, t)
        if j != t:
            col_swap(j, t)
        while True:
            changed = False
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    row_add(i, t, -q)
                    if a[i][t]:
                        row_swap(i, t)
                        changed = True
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    col_add(j, t, -q)
                    if a[t][j]:
                        col_swap(j, t)
                        changed = True
            if changed:
                continue
            bad = next(
                (i for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % a[t][t]),
                None,
            )
            if bad is None:
                break
            row_add(t, bad, 1)
        if a[t][t] < 0:
            row_neg(t)
        t += 1
    mk = IntMatrix.from_rows
    return SmithForm(
        mk(U) if nr else IntMatrix.identity(0),
        IntMatrix(tuple(tuple(r) for r in a), ncols=nc),
        IntMatrix(tuple(tuple(r) for r in V), ncols=nc) if nc else IntMatrix(((),) * 1, ncols=0),
        mk(Ui),
        IntMatrix(tuple(tuple(r) for r in Vi), ncols=nc) if nc else IntMatrix(((),) * 1, ncols=0),
    )


def normal_forms(m: IntMatrix) -> tuple[IntMatrix, tuple[IntMatrix, IntMatrix, IntMatrix]]:
    """Return the column Hermite form of ``m`` and its Smith triple (U, D, V)."""
    s = smith_form(m)
    return hermite_columns(m), (s.U, s.D, s.V)


def lattice_basis(generators: IntMatrix) -> IntMatrix:
    """A basis (independent columns) for the lattice spanned by the columns."""
    h = hermite_columns(generators)
    keep = [c for c in h.columns() if any(c)]
    return IntMatrix.from_columns(keep, nrows=generators.rows)


def lattice_sum(*bases: IntMatrix) -> IntMatrix:
    cols = [c for b in bases for c in b.columns()]
    return lattice_basis(IntMatrix.from_columns(cols, nrows=bases[0].rows))


# ---------------------------------------------------------------------------
# Rational helpers


def rational_solve(a: Sequence[Sequence], b: Sequence) -> RatVector | None:
    """Solve a·x = b over Q when a has independent columns; None if inconsistent."""
    nr = len(a)
    nc = len(a[0]) if nr else 0
    m = [[Fraction(x) for x in row] + [Fraction(bb)] for row, bb in zip(a, b)]
    piv_cols: list[int] = []
    r = 0
    for c in range(nc):
        p = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nr):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    if any(m[i][nc] != 0 for i in range(r, nr)):
        return None
    if len(piv_cols) != nc:
        raise MetacoeffError("DEPENDENT_BASIS", "columns are linearly dependent")
    x = [Fraction(0)] * nc
    for i, c in enumerate(piv_cols):
        x[c] = m[i][nc]
    return tuple(x)


def rational_inverse(a: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(a)
    cols = []
    for j in range(n):
        e = [int(i == j) for i in range(n)]
        x = rational_solve(a, e)
        if x is None:
            raise MetacoeffError("SINGULAR", "matrix is singular")
        cols.append(x)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _left_inverse(basis: IntMatrix) -> list[list[Fraction]]:
    """Rational L with L·basis = I (basis has independent columns)."""
    bt = basis.transpose().tolist()
    gram = [[sum(x * y for x, y in zip(r1, r2)) for r2 in bt] for r1 in bt]
    gi = rational_inverse(gram)
    return [[sum(gi[i][k] * bt[k][j] for k in range(len(bt))) for j in range(basis.rows)] for i in range(len(bt))]


# ---------------------------------------------------------------------------
# Quotients


@dataclass(frozen=True)
class QuotientStructure:
    """The quotient of a lattice by a sublattice, with canonical representatives."""

    elementary_divisors: tuple[int, ...]
    free_rank: int
    sup_basis: IntMatrix
    _P: IntMatrix = field(repr=False)
    _P_inv: IntMatrix = field(repr=False)
    _coords: Callable[[Sequence[int]], Vector] = field(repr=False, compare=False)

    @property
    def index(self) -> Union[int, _Infinite]:
        if self.free_rank:
            return INFINITE
        return prod(self.elementary_divisors)

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    def smith_coordinates(self, v: Sequence[int]) -> Vector:
        """Coordinates of v in the Smith-adapted basis of the sup lattice."""
        return self._P.apply(self._coords(v))

    def rep_map(self, v: Sequence[int]) -> Vector:
        """Canonical coset representative of v in the Smith fundamental box."""
        c = list(self.smith_coordinates(v))
        for i, d in enumerate(self.elementary_divisors):
            c[i] %= d
        return self.sup_basis.apply(self._P_inv.apply(c))

    def key(self, v: Sequence[int]) -> Vector:
        """Hashable coset label (the reduced Smith coordinates)."""
        c = list(self.smith_coordinates(v))
        for i, d in enumerate(self.elementary_divisors):
            c[i] %= d
        return tuple(c)

    def same_coset(self, u: Sequence[int], v: Sequence[int]) -> bool:
        return self.key(u) == self.key(v)

    def representatives(self) -> Iterator[Vector]:
        if not self.is_finite:
            raise MetacoeffError("FINITE_INDEX_REQUIRED", "cannot enumerate an infinite quotient")
        k = len(self.elementary_divisors)
        for box in itertools.product(*(range(d) for d in self.elementary_divisors)):
            c = list(box) + [0] * (self._P.rows - k)
            yield self.sup_basis.apply(self._P_inv.apply(c))


def coordinates_in(basis: IntMatrix) -> Callable[[Sequence[int]], Vector]:
    """Function returning integer coordinates of a lattice vector in ``basis``."""
    n = basis.rows
    if basis.rows == basis.cols and all(
        basis[i, j] == int(i == j) for i in range(n) for j in range(n)
    ):
        return lambda v: tuple(int(x) for x in v)
    left = _left_inverse(basis)

    def coords(v: Sequence[int]) -> Vector:
        c = [sum(row[j] * v[j] for j in range(n)) for row in left]
        if any(x.denominator != 1 for x in c):
            raise MetacoeffError("NOT_IN_LATTICE", f"{tuple(v)} is not in the lattice")
        ci = tuple(int(x) for x in c)
        if basis.apply(ci) != tuple(v):
            raise MetacoeffError("NOT_IN_LATTICE", f"{tuple(v)} is not in the lattice")
        return ci

    return coords


def quotient_structure(sup_basis: IntMatrix, sub_basis: IntMatrix) -> QuotientStructure:
    """Describe sup/sub where both are given by generating columns.

    ``sup_basis`` must have independent columns.  ``sub_basis`` may have
    dependent columns.  Raises ``NOT_SUBLATTICE`` when a generator of the
    sub lattice is not an integral combination of the sup basis.
    """
    coords = coordinates_in(sup_basis)
    try:
        x_cols = [coords(c) for c in sub_basis.columns()]
    except MetacoeffError as exc:
        raise MetacoeffError("NOT_SUBLATTICE", exc.message) from exc
    k = sup_basis.cols
    x = IntMatrix.from_columns(x_cols, nrows=k) if x_cols else IntMatrix(tuple(() for _ in range(k)))
    s = smith_form(x)
    diag = s.diagonal
    divisors = tuple(d for d in diag if d != 0)
    free = k - len(divisors)
    return QuotientStructure(divisors, free, sup_basis, s.U, s.U_inv, coords)


# ---------------------------------------------------------------------------
# Affine congruence systems


@dataclass(frozen=True)
class AffineLattice:
    base_point: RatVector
    basis: IntMatrix
    ambient_dim: int

    def contains(self, v: Sequence) -> bool:
        diff = [Fraction(a) - b for a, b in zip(v, self.base_point)]
        if self.basis.cols == 0:
            return all(d == 0 for d in diff)
        sol = rational_solve(self.basis.tolist(), diff)
        return sol is not None and all(x.denominator == 1 for x in sol)

    @property
    def integral_base(self) -> Vector:
        if any(Fraction(x).denominator != 1 for x in self.base_point):
            raise MetacoeffError("NON_INTEGRAL", "base point is not integral")
        return tuple(int(x) for x in self.base_point)


@dataclass(frozen=True)
class Empty:
    """An empty solution set; ``reason`` distinguishes non-integral systems."""

    reason: str = "INCONSISTENT"

    def __bool__(self) -> bool:
        return False


EMPTY = Empty()
NON_INTEGRAL_SYSTEM = Empty("NON_INTEGRAL_SYSTEM")

Constraint = tuple[Sequence[int], Union[int, Fraction], int]


def affine_congruence_solve(
    constraints: Sequence[Constraint], ambient: IntMatrix
) -> AffineLattice | Empty:
    """Solve f(y) + offset ≡ 0 (mod m) for every constraint, y in the ambient lattice.

    A modulus of 0 turns the constraint into the exact equation
    f(y) + offset = 0.  The answer is returned as an :class:`AffineLattice`
    in ambient coordinates or as an :class:`Empty` marker.
    """
    k = ambient.cols
    n_dim = ambient.rows
    moduli = [m for _, _, m in constraints if m]
    full_rows: list[list[int]] = []
    rhs: list[int] = []
    slack_idx = 0
    for functional, offset, modulus in constraints:
        if modulus < 0:
            raise MetacoeffError("BAD_MODULUS", "moduli must be nonnegative")
        offset = Fraction(offset)
        if offset.denominator != 1:
            return NON_INTEGRAL_SYSTEM
        a = [sum(functional[i] * ambient[i, j] for i in range(n_dim)) for j in range(k)]
        # one slack variable per congruence: f(y) + m*s = -offset
        slack = [0] * len(moduli)
        if modulus:
            slack[slack_idx] = modulus
            slack_idx += 1
        full_rows.append(a + slack)
        rhs.append(-int(offset))
    nvars = k + len(moduli)
    if not full_rows:
        base = tuple(Fraction(0) for _ in range(n_dim))
        return AffineLattice(base, ambient, n_dim)
    A = IntMatrix.from_rows(full_rows)
    s = smith_form(A)
    ub = s.U.apply(rhs)
    diag = s.diagonal
    r = s.rank
    w = [0] * nvars
    for i in range(len(ub)):
        if i < r:
            if ub[i] % diag[i]:
                return EMPTY
            w[i] = ub[i] // diag[i]
        elif ub[i] != 0:
            return EMPTY
    z0 = s.V.apply(w)
    kernel = [s.V.column(j)[:k] for j in range(r, nvars)]
    c0 = z0[:k]
    base = tuple(Fraction(x) for x in ambient.apply(c0))
    if kernel:
        dir_c = lattice_basis(IntMatrix.from_columns(kernel, nrows=k))
        dir_cols = [ambient.apply(col) for col in dir_c.columns()]
    else:
        dir_cols = []
    basis = IntMatrix.from_columns(dir_cols, nrows=n_dim)
    return AffineLattice(base, basis, n_dim)


def sublattice_index(sup_basis: IntMatrix, sub_basis: IntMatrix) -> Union[int, _Infinite]:
    return quotient_structure(sup_basis, sub_basis).index


def vec_gcd(v: Iterable[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, x)
    return g
