"""The finite space Y / Y_{Q,n}, its twisted Weyl action, and fixed-point counts."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Sequence

from .cover import CoverDatum, metaplectic_class
from .errors import CapExceeded, MetacoeffError
from .exactlin import (
    AffineLattice,
    Empty,
    IntMatrix,
    QuotientStructure,
    Vector,
    affine_congruence_solve,
    lattice_sum,
    quotient_structure,
)
from .rootdata import WeylElement, pair

DEFAULT_ENUMERATION_CAP = 50_000


class CosetKind(Enum):
    FREE = "FREE"
    NORMAL = "NORMAL"
    SPECIAL = "SPECIAL"


@dataclass(frozen=True)
class CosetClass:
    kind: CosetKind
    pairing: int  # <y - rho, alpha>
    n_alpha: int


@dataclass(frozen=True)
class CosetSpace:
    cover: CoverDatum
    quotient: QuotientStructure
    d: int
    reps: tuple[Vector, ...] | None

    def rep(self, y: Sequence[int]) -> Vector:
        return self.quotient.rep_map(y)

    def key(self, y: Sequence[int]) -> Vector:
        return self.quotient.key(y)

    def require_reps(self) -> tuple[Vector, ...]:
        if self.reps is None:
            raise CapExceeded(f"d = {self.d} is above the enumeration cap")
        return self.reps


def coset_space(c: CoverDatum, enumerate_cap: int = DEFAULT_ENUMERATION_CAP) -> CosetSpace:
    q = c.quotient
    if not q.is_finite:
        raise MetacoeffError("FINITE_INDEX_REQUIRED", "Y_{Q,n} has infinite index")
    d = q.index
    reps = tuple(q.representatives()) if d <= enumerate_cap else None
    return CosetSpace(c, q, d, reps)


def rho_shift(c: CoverDatum, w: WeylElement) -> Vector:
    """rho - w(rho), an integral vector."""
    rho = c.datum.positive.rho
    wr = w.apply(rho)
    out = [Fraction(a) - b for a, b in zip(rho, wr)]
    if any(x.denominator != 1 for x in out):
        raise MetacoeffError("INTERNAL", "rho - w(rho) is not integral")
    return tuple(int(x) for x in out)


def twisted(c: CoverDatum, w: WeylElement, y: Sequence[int]) -> Vector:
    """w[y] = w(y - rho) + rho in Y (not reduced)."""
    wy = w.apply(y)
    sh = rho_shift(c, w)
    return tuple(a + b for a, b in zip(wy, sh))


def twisted_act(s: CosetSpace, w: WeylElement, coset_rep: Sequence[int]) -> Vector:
    return s.rep(twisted(s.cover, w, coset_rep))


def _pairing_shift(c: CoverDatum, i: int, y: Sequence[int]) -> int:
    # <rho, alpha_i> = 1 for simple alpha_i
    return pair(c.datum.simple_roots[i], y) - 1


def classify(s: CosetSpace | CoverDatum, alpha: int, coset_rep: Sequence[int]) -> CosetClass:
    c = s.cover if isinstance(s, CosetSpace) else s
    v = _pairing_shift(c, alpha, coset_rep)
    na = c.simple_n(alpha)
    if v % c.fix_modulus(alpha):
        return CosetClass(CosetKind.FREE, v, na)
    if v % na == 0:
        return CosetClass(CosetKind.NORMAL, v, na)
    return CosetClass(CosetKind.SPECIAL, v, na)


def image_count(c: CoverDatum, sol: AffineLattice | Empty) -> int:
    """Number of Y_{Q,n}-cosets met by an affine solution set."""
    if not sol:
        return 0
    yqn = c.lattices[0]
    if sol.basis.cols == 0:
        return 1
    total = lattice_sum(sol.basis, yqn)
    return quotient_structure(total, yqn).index


def _fixed_solution(c: CoverDatum, alphas: Sequence[int]) -> AffineLattice | Empty:
    cons = [(c.datum.simple_roots[i], -1, c.fix_modulus(i)) for i in alphas]
    return affine_congruence_solve(cons, IntMatrix.identity(c.datum.rank))


def alpha_counts(c: CoverDatum, alpha: int) -> tuple[int, int]:
    """(b_alpha, a_alpha): fixed cosets of the twisted reflection and free pairs."""
    d = c.quotient.index
    b = image_count(c, _fixed_solution(c, [alpha]))
    if (d - b) % 2:
        raise MetacoeffError("INTERNAL", "d - b_alpha is odd")
    return b, (d - b) // 2


def fixed_count_bW(c: CoverDatum) -> int:
    """b_{W,n}: cosets fixed by every twisted simple reflection."""
    return image_count(c, _fixed_solution(c, range(c.datum.semisimple_rank)))


def fixed_points(s: CosetSpace) -> list[Vector]:
    """Canonical representatives of the W-fixed cosets, by enumeration."""
    c = s.cover
    k = c.datum.semisimple_rank
    return [y for y in s.require_reps() if all(classify(c, i, y).kind != CosetKind.FREE for i in range(k))]


@dataclass(frozen=True)
class ExceptionalSet:
    solution: AffineLattice | Empty
    image_count: int
    targets: tuple[int, ...]

    @property
    def empty(self) -> bool:
        return not self.solution

    def point(self) -> Vector:
        if not self.solution:
            raise MetacoeffError("NOT_EXCEPTIONAL", "no exceptional point")
        return self.solution.integral_base


def exceptional_set(c: CoverDatum) -> ExceptionalSet:
    """Points with <y - rho, alpha> = -n_alpha (or -n_alpha/2 on metaplectic alpha)."""
    special = set(metaplectic_class(c).witnesses)
    cons = []
    targets = []
    for i in range(c.datum.semisimple_rank):
        na = c.simple_n(i)
        if i in special:
            t = -(na // 2)
        else:
            t = -na
        targets.append(t)
        cons.append((c.datum.simple_roots[i], -1 - t, 0))
    sol = affine_congruence_solve(cons, IntMatrix.identity(c.datum.rank))
    return ExceptionalSet(sol, image_count(c, sol), tuple(targets))


def _perm_sign(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for s in range(len(perm)):
        if seen[s]:
            continue
        length = 0
        j = s
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def perm_sign(c: CoverDatum | CosetSpace, alpha: int, enumerate_cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    """Sign of the permutation y -> w_alpha(y) (untwisted) on Y / Y_{Q,n}."""
    s = c if isinstance(c, CosetSpace) else coset_space(c, enumerate_cap)
    reps = s.require_reps()
    index = {s.key(y): k for k, y in enumerate(reps)}
    d = s.cover.datum
    perm = [index[s.key(d.reflect(alpha, y))] for y in reps]
    return _perm_sign(perm)


def centered_reps(s: CosetSpace) -> tuple[Vector, ...]:
    """Representatives moved toward 0 by at most one step along each Y_{Q,n} basis vector."""
    basis = s.cover.lattices[0].columns()
    out = []
    for y in s.require_reps():
        best = None
        for eps in product((0, -1, 1), repeat=len(basis)):
            z = tuple(y[k] + sum(e * b[k] for e, b in zip(eps, basis)) for k in range(len(y)))
            key = (sum(x * x for x in z), sum(e != 0 for e in eps))
            if best is None or key < best[0]:
                best = (key, z)
        out.append(best[1])
    return tuple(out)


@dataclass(frozen=True)
class EnumeratedCounts:
    d: int
    b_alpha: tuple[int, ...]
    b_W: int
    fixed: tuple[Vector, ...]


def enumerated_counts(s: CosetSpace) -> EnumeratedCounts:
    """Fixed cosets found by applying each twisted reflection to every representative."""
    c = s.cover
    d = c.datum
    k = d.semisimple_rank
    refl = [d.simple_reflection(i) for i in range(k)]
    shifts = [rho_shift(c, w) for w in refl]
    b_alpha = [0] * k
    fixed = []
    for y in s.require_reps():
        ry = s.rep(y)
        hits = [s.rep(tuple(a + b for a, b in zip(w.apply(y), sh))) == ry for w, sh in zip(refl, shifts)]
        for i, h in enumerate(hits):
            b_alpha[i] += h
        if all(hits):
            fixed.append(tuple(y))
    return EnumeratedCounts(s.d, tuple(b_alpha), len(fixed), tuple(fixed))
