"""Published conditions and closed forms for the sweep grid.

Each family records how to build its cover, the tabulated predicates for
b_{W,n} = 1 and |Y_n^exc| = 1 (simply connected, Q(short coroot) = 1), and
the closed forms of the two Poincare series.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .cover import bisector_from_q_short, gl_bisector
from .exactlin import IntMatrix
from .poincare import RationalSeries
from .rootdata import RootDatum, build_root_datum

Predicate = Callable[[int], bool]


def two_exponent(n: int) -> int:
    """J(n): the exponent of 2 in n."""
    j = 0
    while n % 2 == 0:
        n //= 2
        j += 1
    return j


def _geometric(numerator: dict[int, int], k: int, m: int = 1) -> RationalSeries:
    """sum numerator[i] T^i / (1 - T^k)^m."""
    num = [0] * (max(numerator) + 1)
    for i, c in numerator.items():
        num[i] += c
    den = [1]
    for _ in range(m):
        nxt = [0] * (len(den) + k)
        for i, c in enumerate(den):
            nxt[i] += c
            nxt[i + k] -= c
        den = nxt
    return RationalSeries(tuple(num), tuple(den))


def _a_odd_series(r: int) -> RationalSeries:
    """sum_{i=0}^{J} T^{2^i} / (1 - T^{2^{i+1}}), J = J((r+1)/2), over 1 - T^{2^{J+1}}."""
    j = two_exponent((r + 1) // 2)
    top = 2 ** (j + 1)
    num: dict[int, int] = {}
    for i in range(j + 1):
        step = 2 ** (i + 1)
        for k in range(top // step):
            e = 2**i + k * step
            num[e] = num.get(e, 0) + 1
    return _geometric(num, top)


ALL = _geometric({1: 1}, 1)
ODD = _geometric({1: 1}, 2)
NOT_4 = _geometric({1: 1, 2: 1, 3: 1}, 4)
ODD_OR_4 = _geometric({1: 1, 3: 1, 4: 1}, 4)


def _always(n: int) -> bool:
    return True


def _odd(n: int) -> bool:
    return n % 2 == 1


def _not4(n: int) -> bool:
    return n % 4 != 0


def _odd_or_4(n: int) -> bool:
    return n % 2 == 1 or n % 4 == 0


@dataclass(frozen=True)
class Family:
    name: str
    family: str
    rank: int
    isogeny: str | None
    builder: Callable[[], tuple[RootDatum, IntMatrix]]
    b_table: Predicate | None
    exc_table: Predicate | None
    p_w: RationalSeries
    p_exc: RationalSeries
    almost_simple: bool = True

    def build(self) -> tuple[RootDatum, IntMatrix]:
        return self.builder()


def _sc(family: str, rank: int | None = None, q_short: int = 1) -> Callable[[], tuple[RootDatum, IntMatrix]]:
    def build() -> tuple[RootDatum, IntMatrix]:
        d = build_root_datum(family, rank, "sc") if rank is not None else build_root_datum(family)
        return d, bisector_from_q_short(d, q_short)

    return build


def _a(r: int) -> Family:
    if r % 2 == 0:
        return Family(f"A{r}", "A", r, "sc", _sc("A", r), _always, _always, ALL, ALL)
    half = (r + 1) // 2

    def b(n: int) -> bool:
        return half % (2 ** two_exponent(n)) == 0

    return Family(f"A{r}", "A", r, "sc", _sc("A", r), b, _odd, _a_odd_series(r), ODD)


_B_TABLE = {0: (_always, _always), 1: (_not4, _not4), 2: (_odd, _odd), 3: (_always, _odd_or_4)}
_B_SERIES = {0: (ALL, ALL), 1: (NOT_4, NOT_4), 2: (ODD, ODD), 3: (ALL, ODD_OR_4)}
_D_TABLE = {0: (_always, _always), 1: (_always, _always), 2: (_odd, _odd), 3: (_not4, _odd)}
_D_SERIES = {0: (ALL, ALL), 1: (ALL, ALL), 2: (ODD, ODD), 3: (NOT_4, ODD)}


def _b(r: int) -> Family:
    b, e = _B_TABLE[r % 4]
    pw, pe = _B_SERIES[r % 4]
    return Family(f"B{r}", "B", r, "sc", _sc("B", r), b, e, pw, pe)


def _c(r: int) -> Family:
    return Family(f"C{r}", "C", r, "sc", _sc("C", r), _not4, _not4, NOT_4, NOT_4)


def _d(r: int) -> Family:
    b, e = _D_TABLE[r % 4]
    pw, pe = _D_SERIES[r % 4]
    return Family(f"D{r}", "D", r, "sc", _sc("D", r), b, e, pw, pe)


def _exceptional(name: str) -> Family:
    if name == "E7":
        return Family(name, name, 7, "sc", _sc(name), _odd, _odd, ODD, ODD)
    return Family(name, name, int(name[1]), "sc", _sc(name), _always, _always, ALL, ALL)


def _so_odd(r: int) -> Family:
    def build() -> tuple[RootDatum, IntMatrix]:
        d = build_root_datum("SOodd", r)
        # Q(e_r) = -1 gives Q = -2 on the short coroots e_i - e_{i+1}
        return d, bisector_from_q_short(d, -2)

    return Family(f"SO{2 * r + 1}", "SOodd", r, None, build, None, None, _geometric({1: 1, 2: 1, 3: 1, 4: 2}, 4), ALL, False)


def _savin(r: int) -> Family:
    def build() -> tuple[RootDatum, IntMatrix]:
        return build_root_datum("GL", r), gl_bisector(r, -1, 0)

    series = _geometric({1: 1, 2: 1, 3: 1}, 2, 2)
    return Family(f"GL{r}-savin", "GL", r, None, build, None, None, series, series, False)


def _kp() -> Family:
    def build() -> tuple[RootDatum, IntMatrix]:
        return build_root_datum("GL", 2), gl_bisector(2, 0, 1)

    series = _geometric({1: 1}, 1, 2)
    return Family("GL2-kp", "GL", 2, None, build, None, None, series, series, False)


def classical_families() -> list[Family]:
    return (
        [_a(r) for r in range(2, 7)]
        + [_b(r) for r in range(3, 7)]
        + [_c(r) for r in range(1, 6)]
        + [_d(r) for r in range(4, 8)]
    )


def exceptional_families() -> list[Family]:
    return [_exceptional(x) for x in ("E6", "E7", "E8", "F4", "G2")]


def other_families() -> list[Family]:
    return [_so_odd(r) for r in range(2, 6)] + [_savin(r) for r in range(2, 5)] + [_kp()]


def all_families() -> list[Family]:
    return classical_families() + exceptional_families() + other_families()


def family(name: str) -> Family:
    for f in all_families():
        if f.name == name:
            return f
    raise KeyError(name)
