"""Sweeps over the degree n, recurrence detection and rational generating series."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cover import CoverDatum, dual_datum
from .errors import MetacoeffError
from .exactlin import IntMatrix
from .orbits import exceptional_set, fixed_count_bW
from .rootdata import RootDatum

MAX_RECURRENCE_ORDER = 8


@dataclass(frozen=True)
class SweepResult:
    n_max: int
    b_seq: tuple[int, ...]
    exc_seq: tuple[int, ...]
    bound_violations: tuple[str, ...] = ()
    pi1_seq: tuple[int | None, ...] = field(default=())


def _is_unimodular(rows: Sequence[Sequence[int]]) -> bool:
    if not rows or len(rows) != len(rows[0]):
        return False
    return abs(IntMatrix.from_rows(rows).det()) == 1


def _sweep_point(args: tuple[RootDatum, IntMatrix, int]) -> tuple[int, int, int | None, list[str]]:
    datum, D, n = args
    c = CoverDatum(datum, D, n)
    b = fixed_count_bW(c)
    exc = exceptional_set(c).image_count
    problems = []
    pi1 = None
    if exc > b:
        problems.append(f"n={n}: exceptional image {exc} exceeds b={b}")
    if datum.is_semisimple:
        pi1 = dual_datum(c).pi1_order
        if b > pi1:
            problems.append(f"n={n}: b={b} exceeds |pi1|={pi1}")
        if _is_unimodular(datum.simple_coroots) and b > 1:
            problems.append(f"n={n}: simply connected but b={b} > 1")
        if _is_unimodular(datum.simple_roots) and b != pi1:
            problems.append(f"n={n}: adjoint but b={b} != |pi1|={pi1}")
    return b, exc, pi1, problems


def sweep(datum: RootDatum, D: IntMatrix, n_max: int, jobs: int = 1) -> SweepResult:
    """b_{W,n} and the exceptional image count for n = 1..n_max, with bound checks."""
    if n_max < 4:
        raise MetacoeffError("BAD_ARGUMENT", "n_max must be at least 4")
    tasks = [(datum, D, n) for n in range(1, n_max + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    return SweepResult(
        n_max=n_max,
        b_seq=tuple(r[0] for r in results),
        exc_seq=tuple(r[1] for r in results),
        bound_violations=tuple(p for r in results for p in r[3]),
        pi1_seq=tuple(r[2] for r in results),
    )


# ---------------------------------------------------------------------------
# Recurrences


@dataclass(frozen=True)
class Periodic:
    period: int
    start: int = 1

    def __str__(self) -> str:
        return f"PERIODIC({self.period})" if self.start == 1 else f"PERIODIC({self.period}, from n={self.start})"


@dataclass(frozen=True)
class LinearRecurrence:
    coeffs: tuple[int, ...]  # b_n = sum coeffs[i] * b_{n-1-i}
    start: int  # first n where the relation is used (b_0 = 0)

    def __str__(self) -> str:
        terms = []
        for i, a in enumerate(self.coeffs, start=1):
            if a:
                terms.append(f"{a}*b[n-{i}]")
        return "LINEAR_RECURRENCE(b[n] = " + (" + ".join(terms) or "0") + ")"


class NoRecurrence:
    def __str__(self) -> str:
        return "NONE"

    def __bool__(self) -> bool:
        return False


NONE = NoRecurrence()

Recurrence = Periodic | LinearRecurrence | NoRecurrence


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Some solution of a consistent rational system, or None."""
    m = [r[:] + [b] for r, b in zip(rows, rhs)]
    ncols = len(rows[0]) if rows else 0
    pivots = []
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = 1 / m[row][col]
        m[row] = [x * inv for x in m[row]]
        for i in range(len(m)):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
    for i in range(row, len(m)):
        if m[i][-1] != 0:
            return None
    sol = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        sol[col] = m[i][-1]
    return sol


def detect_recurrence(seq: Sequence[int], horizon: int | None = None) -> Recurrence:
    """Smallest period on the window, else the shortest integer linear recurrence."""
    h = len(seq) if horizon is None else horizon
    if h > len(seq):
        raise MetacoeffError("BAD_ARGUMENT", "horizon exceeds the sequence length")
    s = list(seq[:h])
    for c in range(1, h // 2 + 1):
        if all(s[i] == s[i + c] for i in range(h - c)):
            return Periodic(c)
    # eventual periodicity with a short transient
    for start in range(1, h // 4 + 1):
        for c in range(1, (h - start) // 2 + 1):
            if all(s[i] == s[i + c] for i in range(start, h - c)):
                return Periodic(c, start + 1)
    ext = [0] + s  # ext[n] = b_n with b_0 = 0
    for k in range(1, MAX_RECURRENCE_ORDER + 1):
        if 2 * k + 2 > h:
            break
        rows = [[Fraction(ext[n - i]) for i in range(1, k + 1)] for n in range(k, h + 1)]
        rhs = [Fraction(ext[n]) for n in range(k, h + 1)]
        sol = _solve_exact(rows, rhs)
        if sol is None or any(x.denominator != 1 for x in sol):
            continue
        return LinearRecurrence(tuple(int(x) for x in sol), k)
    return NONE


# ---------------------------------------------------------------------------
# Rational series


def poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _trim(p: Sequence[int]) -> tuple[int, ...]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


@dataclass(frozen=True)
class RationalSeries:
    """numerator(T) / denominator(T), both integer coefficient lists by degree."""

    numerator: tuple[int, ...]
    denominator: tuple[int, ...]

    def expand(self, count: int) -> list[int]:
        """Coefficients of T^1 .. T^count."""
        q = self.denominator
        if not q or q[0] != 1:
            raise MetacoeffError("BAD_SERIES", "denominator must have constant term 1")
        out = [0] * (count + 1)
        for n in range(count + 1):
            v = self.numerator[n] if n < len(self.numerator) else 0
            for i in range(1, min(n, len(q) - 1) + 1):
                v -= q[i] * out[n - i]
            out[n] = v
        return out[1:]

    def equals(self, other: "RationalSeries") -> bool:
        """Equality as rational functions (cross-multiplied)."""
        return _trim(poly_mul(self.numerator, other.denominator)) == _trim(
            poly_mul(other.numerator, self.denominator)
        )

    def denominator_power(self) -> tuple[int, int] | None:
        """(k, m) with denominator (1 - T^k)^m, when it has that shape."""
        q = _trim(self.denominator)
        if q == (1,):
            return (1, 0)
        for k in range(1, len(q)):
            base = [1] + [0] * (k - 1) + [-1]
            p: list[int] = [1]
            m = 0
            while len(p) < len(q):
                p = poly_mul(p, base)
                m += 1
            if _trim(p) == q:
                return (k, m)
        return None

    def to_text(self) -> str:
        return f"({_poly_text(self.numerator)})/({self._den_text(False)})"

    def to_latex(self) -> str:
        return "\\frac{" + _poly_text(self.numerator, latex=True) + "}{" + self._den_text(True) + "}"

    def _den_text(self, latex: bool) -> str:
        km = self.denominator_power()
        if km is None or km[1] <= 1:
            return _poly_text(self.denominator, latex)
        k, m = km
        inner = _poly_text([1] + [0] * (k - 1) + [-1], latex)
        return f"({inner})^{{{m}}}" if latex else f"({inner})^{m}"

    def to_json(self) -> dict:
        return {"numerator": list(self.numerator), "denominator": list(self.denominator), "text": self.to_text()}

    @staticmethod
    def from_json(doc: dict) -> "RationalSeries":
        return RationalSeries(tuple(int(x) for x in doc["numerator"]), tuple(int(x) for x in doc["denominator"]))


def _poly_text(p: Sequence[int], latex: bool = False) -> str:
    terms = []
    for i, c in enumerate(p):
        if c == 0:
            continue
        if i == 0:
            mono = str(abs(c))
        else:
            power = "T" if i == 1 else (f"T^{{{i}}}" if latex else f"T^{i}")
            mono = power if abs(c) == 1 else f"{abs(c)}{'' if latex else '*'}{power}"
        sign = "-" if c < 0 else "+"
        terms.append((sign, mono))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, mono in terms[1:]:
        out += f" {sign} {mono}"
    return out


def series_from_denominator(seq: Sequence[int], denominator: Sequence[int], start: int) -> RationalSeries:
    ext = [0] + list(seq)
    num_full = poly_mul(ext, list(denominator))
    deg = max(start, len(denominator))
    num = _trim(num_full[:deg])
    return RationalSeries(num, tuple(denominator))


def to_rational_series(seq: Sequence[int], recurrence: Recurrence) -> RationalSeries:
    if isinstance(recurrence, Periodic):
        c = recurrence.period
        den = [1] + [0] * (c - 1) + [-1]
        start = recurrence.start + c
    elif isinstance(recurrence, LinearRecurrence):
        den = [1] + [-a for a in recurrence.coeffs]
        start = recurrence.start
    else:
        raise MetacoeffError("NO_RECURRENCE", "cannot build a series without a recurrence")
    series = series_from_denominator(seq, den, start)
    if series.expand(len(seq)) != list(seq):
        raise MetacoeffError("MISMATCH", "re-expansion disagrees with the sequence")
    return series
