"""Covers given by a bisector D and a degree n, and their dual root data."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from typing import Sequence

from .errors import MetacoeffError
from .exactlin import (
    IntMatrix,
    QuotientStructure,
    Vector,
    lattice_basis,
    quotient_structure,
    rational_inverse,
    smith_form,
    vec_gcd,
)
from .rootdata import (
    RootDatum,
    _classify_component,
    cartan_components,
    cartan_type_name,
    pair,
)


@dataclass(frozen=True)
class CoverDatum:
    datum: RootDatum
    D: IntMatrix
    n: int

    def __post_init__(self) -> None:
        r = self.datum.rank
        if self.D.rows != r or self.D.cols != r:
            raise MetacoeffError("BAD_BISECTOR", f"D must be {r}x{r}")
        if self.n < 1:
            raise MetacoeffError("BAD_DEGREE", "n must be positive")
        b = self.B_matrix
        for i in range(self.datum.semisimple_rank):
            s = self.datum.reflection(i)
            # s^T B s == B is Weyl invariance of the polar form, hence of Q
            sbs = [
                [sum(s[p][a] * b[p][q] * s[q][c] for p in range(r) for q in range(r)) for c in range(r)]
                for a in range(r)
            ]
            if any(sbs[a][c] != b[a][c] for a in range(r) for c in range(r)):
                raise MetacoeffError("NOT_WEYL_INVARIANT", f"Q is not invariant under s_{i + 1}")

    @cached_property
    def B_matrix(self) -> tuple[tuple[int, ...], ...]:
        r = self.datum.rank
        return tuple(tuple(self.D[i, j] + self.D[j, i] for j in range(r)) for i in range(r))

    def Q(self, y: Sequence[int]) -> int:
        return sum(y[i] * self.D[i, j] * y[j] for i in range(len(y)) for j in range(len(y)))

    def B(self, y: Sequence[int], z: Sequence[int]) -> int:
        b = self.B_matrix
        return sum(y[i] * b[i][j] * z[j] for i in range(len(y)) for j in range(len(z)))

    def Dform(self, y: Sequence[int], z: Sequence[int]) -> int:
        return sum(y[i] * self.D[i, j] * z[j] for i in range(len(y)) for j in range(len(z)))

    def n_alpha(self, coroot: Sequence[int]) -> int:
        return self.n // gcd(self.n, self.Q(coroot))

    def m_alpha(self, coroot: Sequence[int]) -> int | None:
        na = self.n_alpha(coroot)
        return na // 2 if na % 2 == 0 else None

    def simple_n(self, i: int) -> int:
        return self.n_alpha(self.datum.simple_coroots[i])

    def root_gcd(self, i: int) -> int:
        """g_alpha: gcd of <y, alpha_i> over a basis of Y."""
        return vec_gcd(self.datum.simple_roots[i])

    def fix_modulus(self, i: int) -> int:
        """m'_alpha: least k > 0 with k alpha_i^vee in Y_{Q,n}."""
        q = self.Q(self.datum.simple_coroots[i])
        return self.n // gcd(self.n, self.root_gcd(i) * q)

    def with_n(self, n: int) -> "CoverDatum":
        return CoverDatum(self.datum, self.D, n)

    @cached_property
    def lattices(self) -> tuple[IntMatrix, IntMatrix]:
        return _y_qn(self)

    @cached_property
    def quotient(self) -> QuotientStructure:
        """Y / Y_{Q,n}."""
        return quotient_structure(IntMatrix.identity(self.datum.rank), self.lattices[0])


def _y_qn(c: CoverDatum) -> tuple[IntMatrix, IntMatrix]:
    r = c.datum.rank
    s = smith_form(IntMatrix(c.B_matrix))
    # U B V = diag(d); y = V z lies in Y_{Q,n} iff d_i z_i = 0 mod n
    diag = list(s.diagonal) + [0] * (r - len(s.diagonal))
    cols = []
    for i in range(r):
        scale = c.n // gcd(c.n, diag[i])
        cols.append(tuple(scale * x for x in s.V.column(i)))
    yqn = lattice_basis(IntMatrix.from_columns(cols, nrows=r))
    sc_gens = [
        tuple(c.n_alpha(cv) * x for x in cv) for cv in c.datum.positive.positive_coroots
    ]
    if sc_gens:
        ysc = lattice_basis(IntMatrix.from_columns(sc_gens, nrows=r))
    else:
        ysc = IntMatrix.from_columns([], nrows=r)
    return yqn, ysc


def build_cover(datum: RootDatum, D: IntMatrix | Sequence[Sequence[int]], n: int) -> CoverDatum:
    if not isinstance(D, IntMatrix):
        D = IntMatrix.from_rows(D)
    return CoverDatum(datum, D, n)


def y_qn(c: CoverDatum) -> tuple[IntMatrix, IntMatrix]:
    """Bases of Y_{Q,n} and of Y_{Q,n}^{sc}, the span of the n_alpha alpha^vee."""
    return c.lattices


# ---------------------------------------------------------------------------
# Bisectors


def bisector_from_q_short(datum: RootDatum, q_short: int) -> IntMatrix:
    """Upper-triangular bisector of the Weyl-invariant Q with Q(short coroot) = q_short.

    Values on the simple coroots are fixed by Weyl invariance within each
    irreducible component, every component getting the same short value.
    """
    a = datum.cartan
    k = datum.semisimple_rank
    r = datum.rank
    if k != r:
        raise MetacoeffError("SEMISIMPLE_REQUIRED", "q_short needs a semisimple datum; pass D")
    qv: list[Fraction | None] = [None] * k
    for comp in cartan_components(a):
        qv[comp[0]] = Fraction(1)
        stack = [comp[0]]
        while stack:
            i = stack.pop()
            for j in comp:
                if qv[j] is None and a[i][j]:
                    # Q(a_i^vee) A[j][i] = Q(a_j^vee) A[i][j]
                    qv[j] = qv[i] * a[j][i] / a[i][j]
                    stack.append(j)
        low = min(qv[j] for j in comp)
        for j in comp:
            qv[j] = qv[j] / low * q_short
    # B on the coroot basis: B(a_i^vee, a_j^vee) = Q(a_i^vee) <a_j^vee, a_i>
    b_cor = [[qv[i] * a[j][i] for j in range(k)] for i in range(k)]
    cmat = [[Fraction(datum.simple_coroots[j][p]) for j in range(k)] for p in range(r)]
    cinv = rational_inverse(cmat)
    b_y = [
        [sum(cinv[i][p] * b_cor[i][j] * cinv[j][q] for i in range(k) for j in range(k)) for q in range(r)]
        for p in range(r)
    ]
    rows = []
    for p in range(r):
        row = []
        for q in range(r):
            if p == q:
                v = b_y[p][p] / 2
            elif p < q:
                v = b_y[p][q]
            else:
                v = Fraction(0)
            if v.denominator != 1:
                raise MetacoeffError("NON_INTEGRAL_FORM", f"q_short={q_short} gives a non-integral Q on Y")
            row.append(int(v))
        rows.append(row)
    return IntMatrix.from_rows(rows)


def gl_bisector(r: int, p: int, q: int) -> IntMatrix:
    """D with Q(e_i) = p and B(e_i, e_j) = q for i != j."""
    return IntMatrix.from_rows([[p if i == j else (q if i < j else 0) for j in range(r)] for i in range(r)])


def kp_bisector(c: int) -> IntMatrix:
    """Kazhdan-Patterson GL_2 bisector with twisting parameter c: Q(e_i) = c, B(e_1, e_2) = 2c + 1."""
    return IntMatrix.from_rows([[c, c + 1], [c, c]])


# ---------------------------------------------------------------------------
# Dual datum


@dataclass(frozen=True)
class DualDatum:
    yqn_basis: IntMatrix
    yqn_sc_basis: IntMatrix
    modified_coroots: tuple[Vector, ...]
    modified_roots: tuple[tuple[Fraction, ...], ...]
    rho_qn: tuple[Fraction, ...]
    center_divisors: tuple[int, ...]
    center_free_rank: int
    pi1_divisors: tuple[int, ...] | None
    cartan: tuple[tuple[int, ...], ...]
    cartan_type: str

    @property
    def pi1_order(self) -> int | None:
        if self.pi1_divisors is None:
            return None
        out = 1
        for x in self.pi1_divisors:
            out *= x
        return out

    @property
    def center_order(self) -> int | None:
        if self.center_free_rank:
            return None
        out = 1
        for x in self.center_divisors:
            out *= x
        return out

    def signature(self) -> tuple:
        return (self.cartan_type, self.center_divisors, self.center_free_rank)


def _nontrivial(divs: Sequence[int]) -> tuple[int, ...]:
    return tuple(x for x in divs if x != 1)


def dual_datum(c: CoverDatum) -> DualDatum:
    d = c.datum
    yqn, ysc = c.lattices
    k = d.semisimple_rank
    ns = [c.simple_n(i) for i in range(k)]
    mod_cor = tuple(tuple(ns[i] * x for x in d.simple_coroots[i]) for i in range(k))
    mod_roots = tuple(tuple(Fraction(x, ns[i]) for x in d.simple_roots[i]) for i in range(k))
    r = d.rank
    rho = [Fraction(0)] * r
    for cv in d.positive.positive_coroots:
        na = c.n_alpha(cv)
        for p in range(r):
            rho[p] += Fraction(na * cv[p], 2)
    cq = quotient_structure(yqn, ysc)
    a = d.cartan
    # dual Cartan: <alpha_{j,Q,n}^vee, alpha_{i,Q,n}> with roles of roots and coroots swapped
    cartan = tuple(tuple(ns[j] * a[j][i] // ns[i] for j in range(k)) for i in range(k))
    pi1 = None
    if d.is_semisimple:
        # weight lattice P = {v : <v, alpha_i / n_i> in Z}, basis n_i * omega_i^vee
        roots = [[Fraction(x) for x in row] for row in d.simple_roots]
        w = rational_inverse(roots)  # columns are fundamental coweights
        pmat = [[w[p][i] * ns[i] for i in range(k)] for p in range(r)]
        pinv = rational_inverse(pmat)
        sub_cols = []
        for col in yqn.columns():
            coords = [sum(pinv[i][p] * col[p] for p in range(r)) for i in range(k)]
            if any(x.denominator != 1 for x in coords):
                raise MetacoeffError("INTERNAL", "Y_{Q,n} is not inside the weight lattice")
            sub_cols.append(tuple(int(x) for x in coords))
        q = quotient_structure(IntMatrix.identity(k), IntMatrix.from_columns(sub_cols, nrows=k))
        pi1 = _nontrivial(q.elementary_divisors)
    return DualDatum(
        yqn_basis=yqn,
        yqn_sc_basis=ysc,
        modified_coroots=mod_cor,
        modified_roots=mod_roots,
        rho_qn=tuple(rho),
        center_divisors=_nontrivial(cq.elementary_divisors),
        center_free_rank=cq.free_rank,
        pi1_divisors=pi1,
        cartan=cartan,
        cartan_type=cartan_type_name(cartan),
    )


# ---------------------------------------------------------------------------
# Metaplectic type


@dataclass(frozen=True)
class MetaplecticClass:
    metaplectic: bool
    witnesses: tuple[int, ...] = ()

    def __str__(self) -> str:
        if not self.metaplectic:
            return "NOT_METAPLECTIC"
        return "METAPLECTIC(" + ",".join(f"alpha_{i + 1}" for i in self.witnesses) + ")"


def special_possible(c: CoverDatum, i: int) -> bool:
    """Whether some y in Y is alpha_i-special.

    Values <y - rho, alpha_i> run over g*Z - 1; a special value is fixed
    (divisible by m'_alpha) yet not divisible by n_alpha.
    """
    g = c.root_gcd(i)
    mp = c.fix_modulus(i)
    na = c.simple_n(i)
    period = lcm(mp, na) * max(g, 1)
    for k in range(period + 1):
        v = g * k - 1
        if v % mp == 0 and v % na != 0:
            return True
    return False


def metaplectic_class(c: CoverDatum) -> MetaplecticClass:
    d = c.datum
    wit = tuple(i for i in range(d.semisimple_rank) if special_possible(c, i))
    a = d.cartan
    for i in wit:
        comp = next(cc for cc in cartan_components(a) if i in cc)
        fam, _ = _classify_component(a, comp)
        is_long = all(a[i][j] != -2 for j in comp if j != i)
        if fam not in ("A", "C") or (fam == "A" and len(comp) > 1) or not is_long:
            raise MetacoeffError("INTERNAL", "special cosets outside a C_r long root")
        if c.simple_n(i) % 4 != 2:
            raise MetacoeffError("INTERNAL", "special cosets need n_alpha = 2 mod 4")
    return MetaplecticClass(bool(wit), wit)


# ---------------------------------------------------------------------------
# Periodicity of the dual data


@dataclass(frozen=True)
class PeriodResult:
    period: int
    verified_up_to: int


def dual_period(datum: RootDatum, D: IntMatrix, n_max: int) -> PeriodResult:
    """Smallest c with matching dual data at n and n + c on the whole window."""
    if not datum.is_semisimple:
        raise MetacoeffError("SEMISIMPLE_REQUIRED", "dual_period needs a semisimple datum")
    if n_max < 4:
        raise MetacoeffError("BAD_ARGUMENT", "n_max must be at least 4")
    sigs = [None] + [dual_datum(CoverDatum(datum, D, n)).signature() for n in range(1, n_max + 1)]
    for c in range(1, n_max // 2 + 1):
        if all(sigs[n] == sigs[n + c] for n in range(1, n_max - c + 1)):
            return PeriodResult(c, n_max)
    raise MetacoeffError("NO_PERIOD_FOUND", f"no period up to {n_max}")
