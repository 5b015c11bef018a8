"""Scattering, change-of-basis and local coefficients matrices, their
determinant and trace, Whittaker values and the adjoint gamma product.

Conventions. A character chi is unramified on Y_{Q,n}; chi(s_y) for y in
Y_{Q,n} is the torus monomial of the coordinates of y in the fixed basis of
Y_{Q,n}. Twisted characters are stored as chi_A(s_y) = chi(s_{A y}) for a
Weyl matrix A, so that {}^u chi = chi_{A u^-1}. Matrices use the display
orientation: the row index is gamma' = s_y and the column index is
gamma = s_{y1}, with entry tau(w, chi, gamma, gamma').
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import ceil
from typing import Sequence

from sympy import QQ, Poly, cyclotomic_poly, symbols
from sympy.polys.fields import field as sym_field

from .cover import CoverDatum, metaplectic_class
from .errors import CapExceeded, MetacoeffError
from .exactlin import Vector, coordinates_in, rational_solve
from .orbits import (
    CosetKind,
    alpha_counts,
    classify,
    coset_space,
    exceptional_set,
    perm_sign,
    twisted,
)
from .rootdata import RootDatum, WeylElement, pair, weyl_group
from .symbolic import (
    ONE,
    ZERO,
    Qi,
    R,
    SymExpr,
    SymMatrix,
    gauss,
    monomial,
    parse,
)

__all__ = [
    "SymExpr",
    "SymMatrix",
    "Character",
    "GammaBundle",
    "DetCheck",
    "scattering_matrix",
    "scattering_row",
    "change_basis_matrix",
    "local_coeff_matrix",
    "verify_det_T_M1",
    "det_rhs_T_M1",
    "trace_closed_form",
    "aux_lemma_check",
    "gk_coeff",
    "whittaker_value",
    "weyl_char_trace",
    "freudenthal_character",
    "dominant_grid",
    "casselman_shalika_check",
    "adjoint_gamma_product",
    "AdjointGammaResult",
    "parse",
]

DEFAULT_MATRIX_CAP = 400


def _identity(r: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(i == j) for j in range(r)) for i in range(r))


def _matmul(a, b) -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))) for i in range(len(a))
    )


def _apply(a, y: Sequence) -> tuple:
    return tuple(sum(x * v for x, v in zip(row, y)) for row in a)


# ---------------------------------------------------------------------------
# Characters


@dataclass(frozen=True)
class Character:
    """chi_A(s_y) = chi(s_{A y}) for y in Y_{Q,n}."""

    cover: CoverDatum
    A: tuple[tuple[int, ...], ...]

    @staticmethod
    def base(c: CoverDatum) -> "Character":
        return Character(c, _identity(c.datum.rank))

    @cached_property
    def _coords(self):
        return coordinates_in(self.cover.lattices[0])

    def value(self, y: Sequence[int]) -> SymExpr:
        v = _apply(self.A, y)
        try:
            return monomial(self._coords(v))
        except MetacoeffError as exc:
            raise MetacoeffError("NOT_IN_YQN", f"{tuple(y)} is not in Y_{{Q,n}}") from exc

    def twist(self, u: WeylElement) -> "Character":
        """{}^u chi, i.e. y -> chi(u^-1 y)."""
        return Character(self.cover, _matmul(self.A, _inverse(u.matrix)))

    def pullback(self, u: WeylElement) -> "Character":
        """{}^{u^-1} chi, i.e. y -> chi(u y)."""
        return Character(self.cover, _matmul(self.A, u.matrix))


def _inverse(m) -> tuple[tuple[int, ...], ...]:
    r = len(m)
    cols = []
    for j in range(r):
        e = [int(i == j) for i in range(r)]
        sol = rational_solve(m, e)
        cols.append([int(Fraction(x)) for x in sol])
    return tuple(tuple(cols[j][i] for j in range(r)) for i in range(r))


# ---------------------------------------------------------------------------
# Gamma factors


def _coroot_of(c: CoverDatum, alpha: int | Sequence[int]) -> Vector:
    if isinstance(alpha, int):
        return c.datum.simple_coroots[alpha]
    return tuple(alpha)


@dataclass(frozen=True)
class GammaBundle:
    x_alpha: SymExpr
    gamma_inv: SymExpr
    meta_gamma_inv: SymExpr | None
    plancherel_inv: SymExpr

    @staticmethod
    def of(c: CoverDatum, alpha: int | Sequence[int], chi: Character | None = None) -> "GammaBundle":
        chi = chi or Character.base(c)
        cv = _coroot_of(c, alpha)
        na = c.n_alpha(cv)
        x = chi.value(tuple(na * a for a in cv))
        q = Qi()
        gi = (1 - q / x) / (1 - x)
        gi_twisted = (1 - q * x) / (1 - 1 / x)
        meta = None
        ma = c.m_alpha(cv)
        if ma is not None:
            try:
                xm = chi.value(tuple(ma * a for a in cv))
            except MetacoeffError:
                xm = None
            if xm is not None:
                G = gauss(c.n, ma * c.Q(cv))
                meta = (1 - q / x) * (1 - xm * G) / ((1 - x) * (1 - G / xm))
        return GammaBundle(x, gi, meta, gi * gi_twisted)


def gk_coeff(c: CoverDatum, w: WeylElement, chi: Character | None = None) -> SymExpr:
    """Gindikin-Karpelevich coefficient: prod over alpha > 0, w(alpha) < 0."""
    chi = chi or Character.base(c)
    d = c.datum
    out = ONE
    q = Qi()
    for cv in d.positive.positive_coroots:
        if not d.is_positive_coroot(w.apply(cv)):
            x = chi.value(tuple(c.n_alpha(cv) * a for a in cv))
            out = out * (1 - q * x) / (1 - x)
    return out


# ---------------------------------------------------------------------------
# Matrices


def _reps(c: CoverDatum, reps: Sequence[Sequence[int]] | None, cap: int) -> tuple[Vector, ...]:
    s = coset_space(c, enumerate_cap=cap)
    if s.d > cap:
        raise CapExceeded(f"d = {s.d} exceeds the matrix cap {cap}")
    if reps is None:
        return s.require_reps()
    reps = tuple(tuple(int(v) for v in y) for y in reps)
    keys = {s.key(y) for y in reps}
    if len(reps) != s.d or len(keys) != s.d:
        raise MetacoeffError("BAD_REPRESENTATIVES", "representatives must be one per coset")
    return reps


class _RankOne:
    """Rows of the rank-one scattering matrix for alpha_i at chi, built on demand."""

    def __init__(self, c: CoverDatum, reps: tuple[Vector, ...], i: int, chi: Character):
        d = c.datum
        self.c = c
        self.reps = reps
        self.space = coset_space(c, enumerate_cap=len(reps))
        self.index = {self.space.key(y): k for k, y in enumerate(reps)}
        self.alpha = d.simple_roots[i]
        self.na = c.simple_n(i)
        self.qa = c.Q(d.simple_coroots[i])
        self.x = chi.value(tuple(self.na * a for a in d.simple_coroots[i]))
        self.wa = d.simple_reflection(i)
        self.chi = chi

    def row(self, r: int) -> dict[int, SymExpr]:
        y = self.reps[r]
        k = ceil(Fraction(pair(self.alpha, y), self.na))
        out = {r: (1 - Qi()) * self.x**k / (1 - self.x)}
        ty = twisted(self.c, self.wa, y)
        col = self.index[self.space.key(ty)]
        z = tuple(a - b for a, b in zip(self.reps[col], ty))
        corr = self.chi.value(tuple(-v for v in self.wa.apply(z)))
        g = gauss(self.c.n, (pair(self.alpha, y) - 1) * self.qa) * corr
        out[col] = out[col] + g if col in out else g
        return {j: v for j, v in out.items() if not v.is_zero()}


def _rank_one_scattering(c: CoverDatum, reps: tuple[Vector, ...], i: int, chi: Character) -> SymMatrix:
    ro = _RankOne(c, reps, i, chi)
    out = SymMatrix.zeros(reps)
    for r in range(len(reps)):
        for j, v in ro.row(r).items():
            out[r][j] = v
    return SymMatrix(reps, out)


def _as_element(d: RootDatum, w: WeylElement | int | Sequence[int]) -> WeylElement:
    if isinstance(w, int):
        w = d.simple_reflection(w)
    elif not isinstance(w, WeylElement):
        w = d.element(tuple(w))
    if d.length_of(w) != w.length:
        raise MetacoeffError("NOT_REDUCED", f"word {w.word} is not reduced")
    return w


def scattering_row(
    c: CoverDatum,
    reps: Sequence[Sequence[int]] | None,
    w: WeylElement | int | Sequence[int],
    row: int,
    chi: Character | None = None,
    cap: int = DEFAULT_MATRIX_CAP,
) -> dict[int, SymExpr]:
    """One row of scattering_matrix, as {column: entry}, without forming the matrix."""
    reps = _reps(c, reps, cap)
    d = c.datum
    w = _as_element(d, w)
    current = chi or Character.base(c)
    vec: dict[int, SymExpr] = {row: ONE}
    for i in reversed(w.word):
        ro = _RankOne(c, reps, i, current)
        nxt: dict[int, SymExpr] = {}
        for k, a in vec.items():
            for j, b in ro.row(k).items():
                nxt[j] = nxt[j] + a * b if j in nxt else a * b
        vec = {j: v for j, v in nxt.items() if not v.is_zero()}
        current = current.twist(d.simple_reflection(i))
    return vec


def scattering_matrix(
    c: CoverDatum,
    reps: Sequence[Sequence[int]] | None,
    w: WeylElement | int | Sequence[int],
    chi: Character | None = None,
    eps: int = 1,
    cap: int = DEFAULT_MATRIX_CAP,
) -> SymMatrix:
    """Scattering matrix of w (a reduced word) at the character chi.

    S(w2 w1, chi) = S(w1, chi) S(w2, {}^{w1} chi) in the display orientation.
    """
    if eps != 1:
        raise MetacoeffError("EPSILON_UNSUPPORTED", "only the mu_{2n} regime (eps = 1) is supported")
    reps = _reps(c, reps, cap)
    d = c.datum
    w = _as_element(d, w)
    chi = chi or Character.base(c)
    out = SymMatrix.identity(reps)
    current = chi
    for i in reversed(w.word):
        out = out @ _rank_one_scattering(c, reps, i, current)
        current = current.twist(d.simple_reflection(i))
    return out


def change_basis_matrix(
    c: CoverDatum,
    reps: Sequence[Sequence[int]] | None,
    alpha: int,
    chi: Character | None = None,
    cap: int = DEFAULT_MATRIX_CAP,
) -> SymMatrix:
    """Monomial permutation matrix of y -> w_alpha(y) on cosets."""
    reps = _reps(c, reps, cap)
    chi = chi or Character.base(c)
    s = coset_space(c, enumerate_cap=len(reps))
    index = {s.key(y): k for k, y in enumerate(reps)}
    wa = c.datum.simple_reflection(alpha)
    out = SymMatrix.zeros(reps)
    for i, y in enumerate(reps):
        wy = wa.apply(y)
        j = index[s.key(wy)]
        z = tuple(a - b for a, b in zip(wy, reps[j]))
        # ({}^{w_alpha} chi)(s_z)^-1 = chi(s_{-w_alpha z})
        out[j][i] = chi.value(tuple(-v for v in wa.apply(z)))
    return SymMatrix(reps, out)


def local_coeff_matrix(
    c: CoverDatum,
    reps: Sequence[Sequence[int]] | None,
    alpha: int,
    chi: Character | None = None,
    cap: int = DEFAULT_MATRIX_CAP,
) -> SymMatrix:
    """M = S C for the simple reflection w_alpha; support checked."""
    reps = _reps(c, reps, cap)
    m = scattering_matrix(c, reps, alpha, chi, cap=cap) @ change_basis_matrix(c, reps, alpha, chi, cap=cap)
    expected = _expected_support(c, reps, alpha)
    if not m.support() <= expected:
        raise MetacoeffError("INTERNAL", "local coefficients matrix has unexpected support")
    return m


def _expected_support(c: CoverDatum, reps: tuple[Vector, ...], alpha: int) -> set[tuple[int, int]]:
    s = coset_space(c, enumerate_cap=len(reps))
    index = {s.key(y): k for k, y in enumerate(reps)}
    d = c.datum
    wa = d.simple_reflection(alpha)
    cv = d.simple_coroots[alpha]
    out = set()
    for i, y in enumerate(reps):
        out.add((i, index[s.key(wa.apply(y))]))
        out.add((i, index[s.key(tuple(a - b for a, b in zip(y, cv)))]))
    return out


def expected_support(c: CoverDatum, reps: Sequence[Sequence[int]], alpha: int) -> set[tuple[int, int]]:
    """Cells (y, w_alpha(y)) and (y, y - alpha^vee) allowed to be nonzero in M."""
    return _expected_support(c, tuple(tuple(y) for y in reps), alpha)


# ---------------------------------------------------------------------------
# Determinant


@dataclass(frozen=True)
class DetCheck:
    ok: bool
    lhs: SymExpr
    rhs: SymExpr

    @property
    def status(self) -> str:
        return "OK" if self.ok else "MISMATCH"

    def to_json(self) -> dict:
        out = {"status": self.status, "det": self.lhs.to_text()}
        if not self.ok:
            out["rhs"] = self.rhs.to_text()
        return out


def _h_alpha(chi: Character, cv: Sequence[int], k: int) -> SymExpr:
    """chi(h_alpha(varpi^k)) = chi(s_{k alpha^vee})."""
    return chi.value(tuple(k * a for a in cv))


def det_rhs_T_M1(c: CoverDatum, alpha: int, chi: Character | None = None) -> SymExpr:
    """sgn (-1)^a mu^-a times the gamma / metaplectic gamma factor."""
    chi = chi or Character.base(c)
    s = coset_space(c)
    reps = s.require_reps()
    cv = c.datum.simple_coroots[alpha]
    b, a = alpha_counts(c, alpha)
    sgn = perm_sign(s, alpha)
    kinds = [classify(c, alpha, y).kind for y in reps]
    n_nor = kinds.count(CosetKind.NORMAL)
    n_spe = kinds.count(CosetKind.SPECIAL)
    if n_nor + n_spe != b:
        raise MetacoeffError("INTERNAL", "fixed coset count disagrees with enumeration")
    g = GammaBundle.of(c, alpha, chi)
    out = SymExpr.const(sgn * (-1) ** a) * g.plancherel_inv**a
    na = c.simple_n(alpha)
    ma = c.m_alpha(cv) or 0
    expo = n_nor * na + n_spe * ma - s.d
    out = out * _h_alpha(chi, cv, expo)
    if n_nor:
        out = out * g.gamma_inv**n_nor
    if n_spe:
        if g.meta_gamma_inv is None:
            raise MetacoeffError("INTERNAL", "special cosets without a metaplectic gamma factor")
        out = out * g.meta_gamma_inv**n_spe
    return out


def verify_det_T_M1(
    c: CoverDatum,
    alpha: int,
    reps: Sequence[Sequence[int]] | None = None,
    chi: Character | None = None,
    cap: int = DEFAULT_MATRIX_CAP,
) -> DetCheck:
    m = local_coeff_matrix(c, reps, alpha, chi, cap=cap)
    lhs = m.det()
    rhs = det_rhs_T_M1(c, alpha, chi)
    return DetCheck(lhs == rhs, lhs, rhs)


def change_basis_det_expected(c: CoverDatum, reps: Sequence[Sequence[int]], alpha: int) -> SymExpr:
    """perm sign times chi(h_alpha(varpi^{-<sum y_i, alpha>}))."""
    s = coset_space(c)
    total = [sum(y[k] for y in reps) for k in range(c.datum.rank)]
    k = -pair(c.datum.simple_roots[alpha], total)
    return SymExpr.const(perm_sign(s, alpha)) * _h_alpha(Character.base(c), c.datum.simple_coroots[alpha], k)


# ---------------------------------------------------------------------------
# Trace


def trace_closed_form(c: CoverDatum) -> SymExpr:
    """Closed form of Tr(M) for a rank-one SL_2-type cover."""
    d = c.datum
    if d.semisimple_rank != 1 or d.rank != 1:
        raise MetacoeffError("BAD_ARGUMENT", "trace closed forms are for SL_2 covers")
    n = c.n
    cv = d.simple_coroots[0]
    chi = Character.base(c)
    g = GammaBundle.of(c, 0, chi)
    if n == 1:
        return g.gamma_inv
    if n == 2:
        if g.meta_gamma_inv is None:
            raise MetacoeffError("INTERNAL", "no metaplectic gamma factor at n = 2")
        return g.meta_gamma_inv
    if n % 4:
        return (1 - Qi()) / (1 - _h_alpha(chi, cv, n))
    return (1 - Qi()) / (1 - _h_alpha(chi, cv, n // 2))


def aux_lemma_check(n: int) -> bool:
    """(1-q^-1)/(1-T^n) = (1/n) sum_i (1-q^-1 (T z^i)^-1)/(1-T z^i) in Q(z)(T), z^n primitive."""
    if n < 2:
        raise MetacoeffError("BAD_ARGUMENT", "n must be at least 2")
    K, T, Qv, z = sym_field("T,Qv,z", QQ)
    total = K.zero
    for i in range(n):
        u = T * z**i
        total += (1 - Qv / u) / (1 - u)
    diff = n * (1 - Qv) / (1 - T**n) - total
    zs = symbols("z")
    coeffs = Poly(cyclotomic_poly(n, zs), zs).all_coeffs()
    phi = sum((int(a) * z.numer**k for k, a in enumerate(reversed(coeffs))), K.ring.zero)
    if diff.denom.rem(phi) == 0:
        raise MetacoeffError("INTERNAL", "denominator vanishes at a primitive root")
    return diff.numer.rem(phi) == 0


# ---------------------------------------------------------------------------
# Whittaker values and characters


def _delta_half(c: CoverDatum, y: Sequence[int]) -> SymExpr:
    """delta_B^{1/2}(s_y) = R^{-<y, 2 rho_X>}."""
    return R() ** (-pair(c.datum.positive.two_rho_X, y))


def _check_all_normal(c: CoverDatum) -> None:
    if metaplectic_class(c).metaplectic:
        raise MetacoeffError("METAPLECTIC_UNSUPPORTED", "exceptional points are special for some alpha")


def _is_exceptional(c: CoverDatum, z: Sequence[int]) -> bool:
    ex = exceptional_set(c)
    return bool(ex.solution) and ex.solution.contains(z)


def _is_dominant(c: CoverDatum, y: Sequence[int]) -> bool:
    return all(pair(a, y) >= 0 for a in c.datum.simple_roots)


def whittaker_value(
    c: CoverDatum,
    z: Sequence[int],
    y: Sequence[int],
    include_delta: bool = False,
    group: list[WeylElement] | None = None,
) -> SymExpr:
    """W_{s_z}(s_{y-z}) divided by delta_B^{1/2}(s_{y-z}) (or times it back).

    Sum over w of c_gk(w_G w^-1) tau(w, {}^{w^-1}chi, s_z, s_{w_G(y) + z}).
    """
    _check_all_normal(c)
    z = tuple(z)
    y = tuple(y)
    if not _is_exceptional(c, z):
        raise MetacoeffError("NOT_EXCEPTIONAL", f"{z} is not an exceptional point")
    coords = coordinates_in(c.lattices[0])
    coords(y)
    if not _is_dominant(c, y):
        raise MetacoeffError("NOT_DOMINANT", f"{y} is not dominant")
    d = c.datum
    W = group or weyl_group(d)
    wG = d.longest_element
    wGy = wG.apply(y)
    chi = Character.base(c)
    s = coset_space(c, enumerate_cap=DEFAULT_MATRIX_CAP)
    reps = list(s.require_reps())
    key_z = s.key(z)
    reps = [z if s.key(r) == key_z else r for r in reps]
    iz = reps.index(z)
    total = ZERO
    for w in W:
        w_inv = WeylElement(_inverse(w.matrix), ())
        chi_w = chi.pullback(w)
        tau = scattering_row(c, reps, w, iz, chi_w).get(iz)
        if tau is None:
            continue
        # row translation by w_G(y) multiplies by chi_w(s_{w_G y})
        trans = chi_w.value(wGy)
        coeff = gk_coeff(c, _compose(wG, w_inv), chi)
        total = total + coeff * tau * trans
    if include_delta:
        total = total * _delta_half(c, tuple(a - b for a, b in zip(y, z)))
    return total


def _compose(a: WeylElement, b: WeylElement) -> WeylElement:
    return WeylElement(_matmul(a.matrix, b.matrix), ())


def whittaker_product_form(c: CoverDatum) -> SymExpr:
    """prod over alpha > 0 of (1 - Qi x_alpha)."""
    chi = Character.base(c)
    out = ONE
    for cv in c.datum.positive.positive_coroots:
        out = out * (1 - Qi() * chi.value(tuple(c.n_alpha(cv) * a for a in cv)))
    return out


def _dual_roots(c: CoverDatum) -> list[Vector]:
    return [tuple(c.n_alpha(cv) * a for a in cv) for cv in c.datum.positive.positive_coroots]


def weyl_char_trace(c: CoverDatum, y: Sequence[int], group: list[WeylElement] | None = None) -> SymExpr:
    """Alternating-sum ratio of the Weyl character formula on the dual side."""
    d = c.datum
    y = tuple(y)
    if not _is_dominant(c, y):
        raise MetacoeffError("NOT_DOMINANT", f"{y} is not dominant")
    chi = Character.base(c)
    W = group or weyl_group(d)
    pos = _dual_roots(c)
    rho = tuple(sum(Fraction(r[k], 2) for r in pos) for k in range(d.rank))

    def shifted(w: WeylElement, base) -> Vector:
        v = tuple(a + b for a, b in zip(w.apply(base), rho))
        if any(Fraction(x).denominator != 1 for x in v):
            raise MetacoeffError("INTERNAL", "w(y + rho) + rho is not integral")
        return tuple(int(x) for x in v)

    num = ZERO
    den = ZERO
    yr = tuple(Fraction(a) + b for a, b in zip(y, rho))
    for w in W:
        sg = SymExpr.const((-1) ** d.length_of(w))
        num = num + sg * chi.value(shifted(w, yr))
        den = den + sg * chi.value(shifted(w, rho))
    if den.is_zero():
        raise MetacoeffError("DENOMINATOR_VANISHES", "alternating sum vanishes")
    return num / den


def _invariant_form(c: CoverDatum, group: list[WeylElement]) -> list[list[Fraction]]:
    r = c.datum.rank
    form = [[Fraction(0)] * r for _ in range(r)]
    for w in group:
        m = w.matrix
        for i in range(r):
            for j in range(r):
                form[i][j] += sum(m[k][i] * m[k][j] for k in range(r))
    return form


def freudenthal_character(
    c: CoverDatum, y: Sequence[int], group: list[WeylElement] | None = None
) -> dict[Vector, int]:
    """Weight multiplicities of the highest-weight-y module of the dual root
    system (roots n_alpha alpha^vee), by Freudenthal's recursion."""
    d = c.datum
    W = group or weyl_group(d)
    form = _invariant_form(c, W)
    r = d.rank

    def ip(u, v) -> Fraction:
        return sum(form[i][j] * u[i] * v[j] for i in range(r) for j in range(r))

    pos = _dual_roots(c)
    simple = [tuple(c.simple_n(i) * a for a in d.simple_coroots[i]) for i in range(d.semisimple_rank)]
    rho = tuple(sum(Fraction(p[k], 2) for p in pos) for k in range(r))
    lam = tuple(y)
    low = d.longest_element.apply(lam)
    depth_vec = rational_solve([[s[k] for s in simple] for k in range(r)], [a - b for a, b in zip(lam, low)])
    bounds = [int(x) for x in depth_vec] if simple else []
    mult: dict[Vector, int] = {lam: 1}
    lr = tuple(Fraction(a) + b for a, b in zip(lam, rho))
    norm_top = ip(lr, lr)
    ranges = [range(b + 1) for b in bounds]
    levels = sorted(itertools.product(*ranges), key=sum)
    for ks in levels:
        if sum(ks) == 0:
            continue
        mu = tuple(lam[k] - sum(ki * s[k] for ki, s in zip(ks, simple)) for k in range(r))
        mr = tuple(Fraction(a) + b for a, b in zip(mu, rho))
        coef = norm_top - ip(mr, mr)
        if coef <= 0:
            continue
        acc = Fraction(0)
        for a in pos:
            j = 1
            while True:
                nu = tuple(m + j * x for m, x in zip(mu, a))
                if not _below(nu, lam, simple):
                    break
                if mult.get(nu):
                    acc += mult[nu] * ip(nu, a)
                j += 1
        val = 2 * acc / coef
        if val.denominator != 1:
            raise MetacoeffError("INTERNAL", "non-integral weight multiplicity")
        if val:
            mult[mu] = int(val)
    return mult


def _below(nu, lam, simple) -> bool:
    """lam - nu is a nonnegative combination of simple roots."""
    if not simple:
        return tuple(nu) == tuple(lam)
    r = len(lam)
    diff = [a - b for a, b in zip(lam, nu)]
    sol = rational_solve([[s[k] for s in simple] for k in range(r)], diff)
    return sol is not None and all(Fraction(x) >= 0 and Fraction(x).denominator == 1 for x in sol)


def character_from_weights(c: CoverDatum, mult: dict[Vector, int]) -> SymExpr:
    chi = Character.base(c)
    out = ZERO
    for mu in sorted(mult):
        out = out + SymExpr.const(mult[mu]) * chi.value(mu)
    return out


def dominant_grid(c: CoverDatum, count: int = 3, bound: int = 2) -> list[Vector]:
    """Small dominant elements of Y_{Q,n}, sorted, starting with 0."""
    basis = c.lattices[0].columns()
    r = c.datum.rank
    found = set()
    for coeffs in itertools.product(range(-bound, bound + 1), repeat=len(basis)):
        y = tuple(sum(k * b[i] for k, b in zip(coeffs, basis)) for i in range(r))
        if _is_dominant(c, y):
            found.add(y)
    ordered = sorted(found, key=lambda v: (sum(pair(a, v) for a in c.datum.simple_roots), sum(map(abs, v)), v))
    return ordered[:count]


@dataclass(frozen=True)
class CSResult:
    ok: bool
    z: Vector
    checked: tuple[Vector, ...]
    failures: tuple[str, ...]

    @property
    def status(self) -> str:
        return "OK" if self.ok else "MISMATCH"


def casselman_shalika_check(c: CoverDatum, ys: Sequence[Sequence[int]] | None = None, count: int = 3) -> CSResult:
    """Product formula at y = 0 and W(y) = Tr(pi_y) W(0) against Freudenthal."""
    _check_all_normal(c)
    ex = exceptional_set(c)
    if ex.empty:
        raise MetacoeffError("NOT_EXCEPTIONAL", "no exceptional point")
    z = ex.point()
    W = weyl_group(c.datum)
    base = whittaker_value(c, z, (0,) * c.datum.rank, group=W)
    failures = []
    if base != whittaker_product_form(c):
        failures.append("product form at y = 0")
    grid = [tuple(y) for y in ys] if ys is not None else dominant_grid(c, count)
    for y in grid:
        val = whittaker_value(c, z, y, group=W)
        tr = weyl_char_trace(c, y, group=W)
        oracle = character_from_weights(c, freudenthal_character(c, y, group=W))
        if tr != oracle:
            failures.append(f"character mismatch at y = {y}")
        if val != tr * base:
            failures.append(f"ratio mismatch at y = {y}")
    return CSResult(not failures, z, tuple(grid), tuple(failures))


# ---------------------------------------------------------------------------
# Adjoint gamma product


@dataclass(frozen=True)
class AdjointGammaResult:
    ok: bool
    product: SymExpr
    eigenvalue: SymExpr
    groups: tuple[tuple[int, tuple[Vector, ...], SymExpr], ...]
    w0: tuple[int, ...]

    @property
    def status(self) -> str:
        return "OK" if self.ok else "MISMATCH"


def _longest_of(d: RootDatum, theta: Sequence[int]) -> WeylElement:
    """Longest element of the parabolic subgroup generated by theta."""
    current = d.identity()
    grown = True
    while grown:
        grown = False
        for i in theta:
            cand = d.element((i,) + current.word)
            if d.length_of(cand) == cand.length:
                current = cand
                grown = True
                break
    return current


def adjoint_gamma_product(c: CoverDatum, theta: Sequence[int]) -> AdjointGammaResult:
    """Exceptional-line eigenvalue of the w_0 chain versus the grouped product."""
    d = c.datum
    theta = tuple(sorted(set(theta)))
    rest = [i for i in range(d.semisimple_rank) if i not in theta]
    if len(rest) != 1:
        raise MetacoeffError("BAD_ARGUMENT", "theta must be a maximal proper subset of the simple roots")
    ex = exceptional_set(c)
    if ex.empty:
        raise MetacoeffError("NO_EXCEPTIONAL", "no exceptional point")
    s = coset_space(c, enumerate_cap=DEFAULT_MATRIX_CAP)
    for i in range(d.semisimple_rank):
        if any(classify(c, i, y).kind == CosetKind.SPECIAL for y in s.require_reps()):
            raise MetacoeffError("SPECIAL_PRESENT", f"alpha_{i + 1} has special cosets")
    wG = d.longest_element
    wt = _longest_of(d, theta)
    w0 = d.element(wG.word)
    if theta:
        # w_0 = w_G w_theta; find a reduced word by greedy descent
        m = _matmul(wG.matrix, wt.matrix)
        w0 = _reduced_word(d, m)
    chi = Character.base(c)
    phi = [cv for cv in d.positive.positive_coroots if not d.is_positive_coroot(w0.apply(cv))]
    q = Qi()
    beta = rest[0]
    groups: dict[int, list[Vector]] = {}
    product = ONE
    for cv in phi:
        x = chi.value(tuple(c.n_alpha(cv) * a for a in cv))
        product = product * (1 - q / x) / (1 - x)
        coefs = d.positive.coroot_coefficients[d.positive.positive_coroots.index(cv)]
        grade_f = Fraction(c.n_alpha(cv) * coefs[beta], c.simple_n(beta))
        if grade_f.denominator != 1:
            raise MetacoeffError("INTERNAL", "non-integral adjoint grading")
        grade = int(grade_f)
        groups.setdefault(grade, []).append(cv)
    grouped = []
    total = ONE
    for grade in sorted(groups):
        f = ONE
        for cv in groups[grade]:
            x = chi.value(tuple(c.n_alpha(cv) * a for a in cv))
            f = f * (1 - q / x) / (1 - x)
        total = total * f
        grouped.append((grade, tuple(groups[grade]), f))
    z = ex.point()
    reps = list(s.require_reps())
    key_z = s.key(z)
    reps = [z if s.key(r) == key_z else r for r in reps]
    iz = reps.index(z)
    line = scattering_row(c, reps, w0, iz, chi)
    eig = line.get(iz, ZERO)
    line_ok = set(line) <= {iz}
    ok = line_ok and eig == product and total == product
    return AdjointGammaResult(ok, product, eig, tuple(grouped), w0.word)


def _reduced_word(d: RootDatum, m) -> WeylElement:
    """A reduced word for the Weyl matrix m, by stripping left descents."""
    word = []
    cur = m
    r = d.rank
    ident = _identity(r)
    while cur != ident:
        for i in range(d.semisimple_rank):
            # left descent: m^-1 alpha_i^vee < 0
            inv = _inverse(cur)
            if not d.is_positive_coroot(_apply(inv, d.simple_coroots[i])):
                word.append(i)
                cur = _matmul(d.reflection(i), cur)
                break
        else:
            raise MetacoeffError("INTERNAL", "no descent found")
    w = d.element(tuple(word))
    if w.matrix != m:
        raise MetacoeffError("INTERNAL", "reduced word reconstruction failed")
    return w
