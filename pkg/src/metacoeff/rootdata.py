"""Root data in Bourbaki coordinates and finite Weyl group machinery.

A :class:`RootDatum` stores everything in coordinates of a fixed basis of
the cocharacter lattice Y: simple coroots are integer column vectors and
simple roots are integer row vectors (functionals on Y).  For the
classical families an ``ambient`` matrix records how the chosen Y-basis
sits inside the usual Bourbaki space, so vectors can be displayed as
combinations of the e_i.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import factorial
from typing import Sequence

from .errors import CapExceeded, MetacoeffError
from .exactlin import IntMatrix, Vector

DEFAULT_WEYL_CAP = 2_000_000

FAMILIES = ("A", "B", "C", "D", "E6", "E7", "E8", "F4", "G2", "GL", "SL2", "Sp", "SOodd")
ISOGENIES = ("sc", "ad", "GL", "SO_odd", "custom")


@dataclass(frozen=True)
class DatumLabel:
    family: str
    rank: int
    isogeny: str = "sc"

    def __str__(self) -> str:
        return f"{self.family}{self.rank}/{self.isogeny}"


def _edge(a: list[list[int]], short: int, long: int, ratio: int) -> None:
    a[short][long] = -ratio
    a[long][short] = -1


def cartan_matrix(family: str, rank: int) -> list[list[int]]:
    """Cartan matrix with A[i][j] = <alpha_i^vee, alpha_j>, Bourbaki numbering."""
    r = rank
    a = [[2 if i == j else 0 for j in range(r)] for i in range(r)]

    def chain(nodes: Sequence[int]) -> None:
        for u, v in zip(nodes, nodes[1:]):
            a[u][v] = a[v][u] = -1

    if family == "A":
        chain(range(r))
    elif family == "B":
        if r < 2:
            raise MetacoeffError("UNSUPPORTED_SPEC", "B_r needs r >= 2")
        chain(range(r - 1))
        _edge(a, r - 1, r - 2, 2)
    elif family == "C":
        if r == 1:
            return a
        chain(range(r - 1))
        _edge(a, r - 2, r - 1, 2)
    elif family == "D":
        if r < 3:
            raise MetacoeffError("UNSUPPORTED_SPEC", "D_r needs r >= 3")
        chain(range(r - 1))
        a[r - 2][r - 1] = a[r - 1][r - 2] = 0
        a[r - 3][r - 1] = a[r - 1][r - 3] = -1
    elif family == "E":
        if r not in (6, 7, 8):
            raise MetacoeffError("UNSUPPORTED_SPEC", "E_r needs r in 6..8")
        chain([0, 2, 3] + list(range(4, r)))
        a[1][3] = a[3][1] = -1
    elif family == "F":
        chain([0, 1])
        chain([2, 3])
        _edge(a, 2, 1, 2)
    elif family == "G":
        _edge(a, 0, 1, 3)
    else:
        raise MetacoeffError("UNSUPPORTED_SPEC", f"unknown Cartan family {family}")
    return a


def _weyl_order(family: str, rank: int) -> int:
    r = rank
    return {
        "A": factorial(r + 1),
        "B": 2**r * factorial(r),
        "C": 2**r * factorial(r),
        "D": 2 ** (r - 1) * factorial(r) if r >= 2 else 2,
        "E": {6: 51840, 7: 2903040, 8: 696729600}.get(r, 0),
        "F": 1152,
        "G": 12,
    }[family]


def cartan_components(a: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(a)
    seen: set[int] = set()
    comps = []
    for s in range(n):
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in range(n):
                if v not in seen and a[u][v] != 0:
                    seen.add(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def _classify_component(a: Sequence[Sequence[int]], nodes: list[int]) -> tuple[str, int]:
    k = len(nodes)
    if k == 1:
        return ("A", 1)
    deg = {u: sum(1 for v in nodes if v != u and a[u][v]) for u in nodes}
    mult = {}
    for u in nodes:
        for v in nodes:
            if u < v and a[u][v]:
                mult[(u, v)] = a[u][v] * a[v][u]
    if any(m == 3 for m in mult.values()):
        return ("G", 2)
    doubles = [e for e, m in mult.items() if m == 2]
    if not doubles:
        branch = [u for u in nodes if deg[u] == 3]
        if not branch:
            return ("A", k)
        b = branch[0]
        arms = []
        for v in nodes:
            if v != b and a[b][v]:
                length, prev, cur = 1, b, v
                while True:
                    nxt = [w for w in nodes if w not in (prev, cur) and a[cur][w]]
                    if not nxt:
                        break
                    prev, cur = cur, nxt[0]
                    length += 1
                arms.append(length)
        arms.sort()
        if arms[0] == 1 and arms[1] == 1:
            return ("D", k)
        return ("E", k)
    (u, v), = doubles
    # the short root of a double bond is the node i with A[i][j] = -2
    short_end = u if a[u][v] == -2 else v
    long_end = v if short_end == u else u
    if k == 4 and deg[u] == 2 and deg[v] == 2:
        return ("F", 4)
    if k == 2:
        # Bourbaki: B2 has alpha_2 short, C2 has alpha_2 long
        return ("B", 2) if short_end == max(nodes) else ("C", 2)
    end = short_end if deg[short_end] == 1 else long_end
    return ("B", k) if end == short_end else ("C", k)


def cartan_type_name(a: Sequence[Sequence[int]]) -> str:
    """Name such as ``"B3"`` or ``"A1xA1"`` for a Cartan matrix (empty: ``"T"``)."""
    if len(a) == 0:
        return "T"
    parts = []
    for comp in cartan_components(a):
        fam, k = _classify_component(a, comp)
        parts.append(f"{fam}{k}")
    return "x".join(parts)


@dataclass(frozen=True)
class PositiveSystem:
    positive_coroots: tuple[Vector, ...]
    positive_roots: tuple[Vector, ...]
    rho: tuple[Fraction, ...]
    two_rho_X: Vector
    coroot_coefficients: tuple[Vector, ...]


@dataclass(frozen=True)
class WeylElement:
    matrix: tuple[tuple[int, ...], ...]
    word: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.word)

    def apply(self, y: Sequence) -> tuple:
        return tuple(sum(a * b for a, b in zip(row, y)) for row in self.matrix)

    def int_matrix(self) -> IntMatrix:
        return IntMatrix(self.matrix)


@dataclass(frozen=True)
class RootDatum:
    """A based root datum (X, Phi, Delta; Y, Phi^vee, Delta^vee) in Y-coordinates."""

    rank: int
    simple_coroots: tuple[Vector, ...]
    simple_roots: tuple[Vector, ...]
    label: DatumLabel
    ambient: IntMatrix | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.simple_roots) != len(self.simple_coroots):
            raise MetacoeffError("BAD_DATUM", "roots and coroots differ in number")
        for v in self.simple_coroots + self.simple_roots:
            if len(v) != self.rank:
                raise MetacoeffError("BAD_DATUM", "vector of wrong length")
        a = self.cartan
        for i in range(len(a)):
            if a[i][i] != 2:
                raise MetacoeffError("BAD_DATUM", "pairing <alpha_i^vee, alpha_i> must be 2")

    @property
    def semisimple_rank(self) -> int:
        return len(self.simple_roots)

    @property
    def is_semisimple(self) -> bool:
        return self.semisimple_rank == self.rank

    @cached_property
    def cartan(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(pair(self.simple_roots[j], ci) for j in range(len(self.simple_roots)))
            for ci in self.simple_coroots
        )

    @cached_property
    def cartan_type(self) -> str:
        return cartan_type_name(self.cartan)

    def reflection(self, i: int) -> tuple[tuple[int, ...], ...]:
        c, a = self.simple_coroots[i], self.simple_roots[i]
        r = self.rank
        return tuple(tuple(int(p == q) - c[p] * a[q] for q in range(r)) for p in range(r))

    def reflect(self, i: int, y: Sequence) -> tuple:
        k = pair(self.simple_roots[i], y)
        c = self.simple_coroots[i]
        return tuple(yy - k * cc for yy, cc in zip(y, c))

    @cached_property
    def positive(self) -> PositiveSystem:
        return _positive_system(self)

    @cached_property
    def _coroot_sign(self) -> dict[Vector, int]:
        signs: dict[Vector, int] = {}
        for c in self.positive.positive_coroots:
            signs[c] = 1
            signs[tuple(-x for x in c)] = -1
        return signs

    def is_positive_coroot(self, v: Sequence[int]) -> bool:
        s = self._coroot_sign.get(tuple(v))
        if s is None:
            raise MetacoeffError("NOT_A_COROOT", f"{tuple(v)} is not a coroot")
        return s > 0

    def root_of(self, coroot: Sequence[int]) -> Vector:
        """The root paired with a positive or negative coroot."""
        ps = self.positive
        v = tuple(coroot)
        for c, a in zip(ps.positive_coroots, ps.positive_roots):
            if c == v:
                return a
            if tuple(-x for x in c) == v:
                return tuple(-x for x in a)
        raise MetacoeffError("NOT_A_COROOT", f"{v} is not a coroot")

    def weyl_order(self) -> int:
        total = 1
        for comp in cartan_components(self.cartan):
            fam, k = _classify_component(self.cartan, comp)
            total *= _weyl_order(fam, k)
        return total

    def element(self, word: Sequence[int]) -> WeylElement:
        """Weyl element s_{i1} ... s_{ik} for the word (i1, ..., ik)."""
        r = self.rank
        m = tuple(tuple(int(p == q) for q in range(r)) for p in range(r))
        for i in reversed(word):
            m = _left_reflect(self, i, m)
        return WeylElement(m, tuple(word))

    def identity(self) -> WeylElement:
        return self.element(())

    def simple_reflection(self, i: int) -> WeylElement:
        return self.element((i,))

    def length_of(self, w: WeylElement) -> int:
        return sum(1 for c in self.positive.positive_coroots if not self.is_positive_coroot(w.apply(c)))

    @cached_property
    def longest_element(self) -> WeylElement:
        """w_G with the lexicographically smallest reduced word."""
        target = len(self.positive.positive_coroots)
        current = self.identity()
        while current.length < target:
            for i in range(self.semisimple_rank):
                cand = self.element((i,) + current.word)
                if self.length_of(cand) == current.length + 1:
                    current = cand
                    break
        return _lexmin_word(self, current)


def pair(functional: Sequence, y: Sequence):
    return sum(a * b for a, b in zip(functional, y))


def _left_reflect(d: RootDatum, i: int, m: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    c, a = d.simple_coroots[i], d.simple_roots[i]
    r = d.rank
    am = [sum(a[p] * m[p][q] for p in range(r)) for q in range(r)]
    return tuple(tuple(m[p][q] - c[p] * am[q] for q in range(r)) for p in range(r))


def _lexmin_word(d: RootDatum, w: WeylElement) -> WeylElement:
    """Recompute the lexicographically smallest reduced word of w."""
    word: list[int] = []
    m = w.matrix
    length = d.length_of(w)
    while length:
        for i in range(d.semisimple_rank):
            m2 = _left_reflect(d, i, m)
            l2 = d.length_of(WeylElement(m2, ()))
            if l2 == length - 1:
                word.append(i)
                m, length = m2, l2
                break
    return WeylElement(w.matrix, tuple(word))


def _positive_system(d: RootDatum) -> PositiveSystem:
    a = d.cartan
    k = d.semisimple_rank
    # roots and coroots as coefficient vectors in the simple bases
    start = []
    for i in range(k):
        e = tuple(int(j == i) for j in range(k))
        start.append((e, e))
    seen = set(start)
    queue = deque(start)
    while queue:
        beta, betav = queue.popleft()
        for i in range(k):
            p = sum(a[i][j] * beta[j] for j in range(k))  # <alpha_i^vee, beta>
            pv = sum(betav[j] * a[j][i] for j in range(k))  # <beta^vee, alpha_i>
            nb = tuple(beta[j] - (p if j == i else 0) for j in range(k))
            nbv = tuple(betav[j] - (pv if j == i else 0) for j in range(k))
            if (nb, nbv) not in seen:
                seen.add((nb, nbv))
                queue.append((nb, nbv))
    pos = sorted(
        ((b, bv) for b, bv in seen if all(x >= 0 for x in b)),
        key=lambda t: (sum(t[1]), tuple(-x for x in t[1])),
    )
    r = d.rank
    coroots, roots, coeffs = [], [], []
    for b, bv in pos:
        coroots.append(tuple(sum(bv[j] * d.simple_coroots[j][p] for j in range(k)) for p in range(r)))
        roots.append(tuple(sum(b[j] * d.simple_roots[j][p] for j in range(k)) for p in range(r)))
        coeffs.append(bv)
    rho = tuple(Fraction(sum(c[p] for c in coroots), 2) for p in range(r))
    two_rho_x = tuple(sum(x[p] for x in roots) for p in range(r))
    return PositiveSystem(tuple(coroots), tuple(roots), rho, two_rho_x, tuple(coeffs))


def positive_system(d: RootDatum) -> tuple[tuple[Vector, ...], tuple[Fraction, ...], Vector]:
    ps = d.positive
    return ps.positive_coroots, ps.rho, ps.two_rho_X


def weyl_group(d: RootDatum, cap: int = DEFAULT_WEYL_CAP) -> list[WeylElement]:
    """All Weyl group elements by breadth-first search, shortest words first.

    Every element carries the lexicographically smallest of its reduced
    words.  Raises ``CAP_EXCEEDED`` before doing any work when the known
    group order is larger than ``cap``.
    """
    if cap < 1:
        raise MetacoeffError("BAD_CAP", "cap must be positive")
    order = d.weyl_order()
    if order > cap:
        raise CapExceeded(f"|W| = {order} exceeds cap {cap}")
    r = d.rank
    ident = tuple(tuple(int(p == q) for q in range(r)) for p in range(r))
    words: dict[tuple, tuple[int, ...]] = {ident: ()}
    level = [ident]
    out = [ident]
    while level:
        nxt: dict[tuple, tuple[int, ...]] = {}
        for m in level:
            wm = words[m]
            for i in range(d.semisimple_rank):
                m2 = _left_reflect(d, i, m)
                if m2 in words:
                    continue
                cand = (i,) + wm
                old = nxt.get(m2)
                if old is None or cand < old:
                    nxt[m2] = cand
        words.update(nxt)
        level = sorted(nxt, key=lambda m: nxt[m])
        out.extend(level)
        if len(words) > cap:
            raise CapExceeded(f"|W| exceeds cap {cap}")
    return [WeylElement(m, words[m]) for m in out]


# ---------------------------------------------------------------------------
# Construction


def _classical_ambient(family: str, rank: int) -> list[Vector]:
    """Simple coroots in Bourbaki coordinates."""
    r = rank
    if family == "A":
        dim = r + 1
        return [tuple(int(p == i) - int(p == i + 1) for p in range(dim)) for i in range(r)]
    dim = r
    base = [tuple(int(p == i) - int(p == i + 1) for p in range(dim)) for i in range(r - 1)]
    if family == "B":
        last = tuple(2 * int(p == r - 1) for p in range(dim))
    elif family == "C":
        last = tuple(int(p == r - 1) for p in range(dim))
    elif family == "D":
        last = tuple(int(p in (r - 2, r - 1)) for p in range(dim))
    else:
        raise MetacoeffError("UNSUPPORTED_SPEC", family)
    return base + [last]


def build_root_datum(spec: DatumLabel | str, rank: int | None = None, isogeny: str | None = None) -> RootDatum:
    """Root datum for a family/rank/isogeny label.

    ``spec`` may be a :class:`DatumLabel` or a family name together with
    ``rank`` and ``isogeny``.  Families ``SL2``, ``Sp``, ``GL`` and
    ``SOodd`` fix their own isogeny.
    """
    if isinstance(spec, DatumLabel):
        label = spec
    else:
        fam = spec
        if fam == "SL2":
            label = DatumLabel("A", 1, "sc")
        elif fam == "Sp":
            label = DatumLabel("C", rank or 1, "sc")
        elif fam == "GL":
            label = DatumLabel("GL", rank or 2, "GL")
        elif fam == "SOodd":
            label = DatumLabel("B", rank or 2, "SO_odd")
        elif fam in ("E6", "E7", "E8", "F4", "G2"):
            label = DatumLabel(fam[0], int(fam[1]), isogeny or "sc")
            if rank not in (None, int(fam[1])):
                raise MetacoeffError("UNSUPPORTED_SPEC", f"{fam} has rank {fam[1]}")
        elif fam in ("A", "B", "C", "D", "E", "F", "G"):
            if rank is None:
                raise MetacoeffError("UNSUPPORTED_SPEC", "rank is required")
            label = DatumLabel(fam, rank, isogeny or "sc")
        else:
            raise MetacoeffError("UNSUPPORTED_SPEC", f"unknown family {fam!r}")
    fam, r, iso = label.family, label.rank, label.isogeny
    if r < 1:
        raise MetacoeffError("UNSUPPORTED_SPEC", "rank must be positive")
    if iso == "GL":
        if fam != "GL":
            raise MetacoeffError("UNSUPPORTED_SPEC", "isogeny GL needs family GL")
        cor = [tuple(int(p == i) - int(p == i + 1) for p in range(r)) for i in range(r - 1)]
        return RootDatum(r, tuple(cor), tuple(cor), label, IntMatrix.identity(r))
    if iso == "SO_odd":
        if fam != "B":
            raise MetacoeffError("UNSUPPORTED_SPEC", "SO_odd is type B")
        cor = [tuple(int(p == i) - int(p == i + 1) for p in range(r)) for i in range(r - 1)]
        cor.append(tuple(2 * int(p == r - 1) for p in range(r)))
        roots = [tuple(int(p == i) - int(p == i + 1) for p in range(r)) for i in range(r - 1)]
        roots.append(tuple(int(p == r - 1) for p in range(r)))
        return RootDatum(r, tuple(cor), tuple(roots), label, IntMatrix.identity(r))
    if fam not in ("A", "B", "C", "D", "E", "F", "G"):
        raise MetacoeffError("UNSUPPORTED_SPEC", f"family {fam} with isogeny {iso}")
    if fam in ("F", "G") and r != {"F": 4, "G": 2}[fam]:
        raise MetacoeffError("UNSUPPORTED_SPEC", f"{fam} has fixed rank")
    a = cartan_matrix(fam, r)
    if iso == "sc":
        cor = [tuple(int(p == i) for p in range(r)) for i in range(r)]
        roots = [tuple(a[i][j] for i in range(r)) for j in range(r)]
        ambient = None
        if fam in ("A", "B", "C", "D"):
            ambient = IntMatrix.from_columns(_classical_ambient(fam, r))
        return RootDatum(r, tuple(cor), tuple(roots), label, ambient)
    if iso == "ad":
        cor = [tuple(a[i][j] for j in range(r)) for i in range(r)]
        roots = [tuple(int(p == j) for p in range(r)) for j in range(r)]
        return RootDatum(r, tuple(cor), tuple(roots), label, None)
    raise MetacoeffError("UNSUPPORTED_SPEC", f"isogeny {iso!r}")


def to_ambient(d: RootDatum, y: Sequence) -> tuple:
    """Bourbaki coordinates of a Y-vector when the datum records them."""
    if d.ambient is None:
        return tuple(y)
    return d.ambient.apply(tuple(y))
