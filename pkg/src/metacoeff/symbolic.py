"""Exact symbolic ring for matrix entries.

Values live in a rational function field over QQ in the generators
R (with Qi = R^-2), torus variables t1..tk, Z, x, and free Gauss and
epsilon symbols. Relations are enforced by construction:

* g_k with 0 < k < n/2 is a free generator; g_0 = -Qi, g_{n/2} = Qi*R*w,
  g_{n-k} = Qi / g_k.
* E_k with 0 < k < n/2 is free; E_0 = 1, E_{n/2} = R^-1 Z^-1 x^-1 w,
  E_{n-k} = Qi Z^-2 x^-2 / E_k.
* Sign symbols (w, h) square to 1 and are kept as branch values: an
  expression stores one field element per assignment of +-1 to its signs.
"""

from __future__ import annotations

import itertools
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import sympy
from sympy import QQ
from sympy.polys.fields import FracElement, field

from .errors import MetacoeffError

SIGN_SYMBOLS = ("h", "w")

_NAME_RE = re.compile(r"^(R|t(\d+)|Z|x|g(\d+)_(\d+)|E(\d+)_(\d+))$")


def _gen_key(name: str) -> tuple:
    m = _NAME_RE.match(name)
    if m is None:
        raise MetacoeffError("BAD_SYMBOL", f"unknown generator {name!r}")
    if name == "R":
        return (0, 0, 0)
    if m.group(2):
        return (1, int(m.group(2)), 0)
    if name == "Z":
        return (2, 0, 0)
    if name == "x":
        return (3, 0, 0)
    if m.group(3):
        return (4, int(m.group(3)), int(m.group(4)))
    return (5, int(m.group(5)), int(m.group(6)))


@lru_cache(maxsize=None)
def _field(gens: tuple[str, ...]):
    return field(",".join(gens), QQ)[0]


def _gens_of(f: FracElement) -> tuple[str, ...]:
    return tuple(str(s) for s in f.field.symbols)


def _union(*gen_sets: Iterable[str]) -> tuple[str, ...]:
    names = set()
    for g in gen_sets:
        names.update(g)
    names.add("R")
    return tuple(sorted(names, key=_gen_key))


def _lift(f: FracElement, gens: tuple[str, ...]) -> FracElement:
    if _gens_of(f) == gens:
        return f
    return f.set_field(_field(gens))


class SymExpr:
    """Immutable exact expression; equality is identity of normal forms."""

    __slots__ = ("signs", "vals")

    def __init__(self, signs: tuple[str, ...], vals: tuple[FracElement, ...]):
        self.signs = signs
        self.vals = vals

    # construction -------------------------------------------------------

    @staticmethod
    def const(c: int | Fraction) -> "SymExpr":
        k = _field(("R",))
        c = Fraction(c)
        return SymExpr((), (k(QQ(c.numerator, c.denominator)),))

    @staticmethod
    def gen(name: str) -> "SymExpr":
        _gen_key(name)
        k = _field(_union([name]))
        return SymExpr((), (k.gens[k.symbols.index(sympy.Symbol(name))],))

    @staticmethod
    def sign(name: str) -> "SymExpr":
        if name not in SIGN_SYMBOLS:
            raise MetacoeffError("BAD_SYMBOL", f"unknown sign symbol {name!r}")
        k = _field(("R",))
        return SymExpr((name,), (k.one, -k.one))

    # alignment ----------------------------------------------------------

    def _expand(self, signs: tuple[str, ...], gens: tuple[str, ...]) -> list[FracElement]:
        pos = [signs.index(s) for s in self.signs]
        idx_of = {a: i for i, a in enumerate(itertools.product((1, -1), repeat=len(self.signs)))}
        lifted = [_lift(v, gens) for v in self.vals]
        return [
            lifted[idx_of[tuple(assign[p] for p in pos)]]
            for assign in itertools.product((1, -1), repeat=len(signs))
        ]

    @staticmethod
    def _align(*exprs: "SymExpr") -> tuple[tuple[str, ...], list[list[FracElement]]]:
        signs = tuple(sorted(set(s for e in exprs for s in e.signs)))
        gens = _union(*(_gens_of(v) for e in exprs for v in e.vals))
        return signs, [e._expand(signs, gens) for e in exprs]

    @staticmethod
    def _make(signs: tuple[str, ...], vals: Sequence[FracElement]) -> "SymExpr":
        # drop signs the value does not depend on
        signs = list(signs)
        vals = list(vals)
        i = 0
        while i < len(signs):
            k = len(signs)
            stride = 2 ** (k - 1 - i)
            plus = [v for j, v in enumerate(vals) if (j // stride) % 2 == 0]
            minus = [v for j, v in enumerate(vals) if (j // stride) % 2 == 1]
            if all(a == b for a, b in zip(plus, minus)):
                signs.pop(i)
                vals = plus
            else:
                i += 1
        return SymExpr(tuple(signs), tuple(vals))

    # arithmetic ---------------------------------------------------------

    @staticmethod
    def coerce(v: "SymExpr | int | Fraction") -> "SymExpr":
        return v if isinstance(v, SymExpr) else SymExpr.const(v)

    def _binop(self, other, op) -> "SymExpr":
        other = SymExpr.coerce(other)
        signs, (a, b) = SymExpr._align(self, other)
        return SymExpr._make(signs, [op(x, y) for x, y in zip(a, b)])

    def __add__(self, other):
        return self._binop(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return SymExpr.coerce(other) - self

    def __mul__(self, other):
        return self._binop(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = SymExpr.coerce(other)
        if any(v == 0 for v in other.vals):
            raise MetacoeffError("DIVISION_BY_ZERO", "division by a zero expression")
        return self._binop(other, lambda x, y: x / y)

    def __rtruediv__(self, other):
        return SymExpr.coerce(other) / self

    def __neg__(self):
        return SymExpr(self.signs, tuple(-v for v in self.vals))

    def __pow__(self, k: int) -> "SymExpr":
        if k < 0 and any(v == 0 for v in self.vals):
            raise MetacoeffError("DIVISION_BY_ZERO", "negative power of zero")
        return SymExpr(self.signs, tuple(v**k for v in self.vals))

    # predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.vals)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (SymExpr, int, Fraction)):
            return NotImplemented
        return (self - SymExpr.coerce(other)).is_zero()

    def __hash__(self) -> int:
        return hash(self.to_text())

    def is_monomial(self) -> bool:
        return not self.signs and len(self.vals[0].numer.terms()) == 1 and len(self.vals[0].denom.terms()) == 1

    # substitution -------------------------------------------------------

    def subs(self, mapping: Mapping[str, "SymExpr"]) -> "SymExpr":
        """Substitute generators by expressions (via the expression tree)."""
        return from_sympy(self.to_sympy(), _n_of(self), extra=mapping)

    # rendering ----------------------------------------------------------

    def branch_values(self) -> dict[tuple[int, ...], FracElement]:
        return dict(zip(itertools.product((1, -1), repeat=len(self.signs)), self.vals))

    def _sign_parts(self) -> list[tuple[tuple[str, ...], FracElement]]:
        """Coefficient of each product of sign symbols."""
        k = len(self.signs)
        assigns = list(itertools.product((1, -1), repeat=k))
        parts = []
        for subset in itertools.product((0, 1), repeat=k):
            acc = None
            for a, v in zip(assigns, self.vals):
                s = 1
                for use, val in zip(subset, a):
                    if use:
                        s *= val
                term = v * s
                acc = term if acc is None else acc + term
            acc = acc * QQ(1, 2**k)
            if acc != 0:
                parts.append((tuple(n for n, u in zip(self.signs, subset) if u), acc))
        return parts

    def to_sympy(self) -> sympy.Expr:
        out = sympy.Integer(0)
        for names, coeff in self._sign_parts():
            term = coeff.as_expr()
            for nm in names:
                term = term * sympy.Symbol(nm)
            out = out + term
        return out

    def to_text(self) -> str:
        return _render(self, latex=False)

    def to_latex(self) -> str:
        return _render(self, latex=True)

    def to_json(self) -> dict:
        return {"expr": self.to_text()}

    def __repr__(self) -> str:
        return f"SymExpr({self.to_text()})"

    def __str__(self) -> str:
        return self.to_text()


ZERO = SymExpr.const(0)
ONE = SymExpr.const(1)


def R() -> SymExpr:
    return SymExpr.gen("R")


def Qi() -> SymExpr:
    return SymExpr.gen("R") ** -2


def omega() -> SymExpr:
    return SymExpr.sign("w")


def torus(i: int) -> SymExpr:
    return SymExpr.gen(f"t{i + 1}")


def monomial(exps: Sequence[int]) -> SymExpr:
    """t1^e1 * ... * tk^ek."""
    out = ONE
    for i, e in enumerate(exps):
        if e:
            out = out * torus(i) ** e
    return out


def gauss(n: int, k: int) -> SymExpr:
    """The Gauss symbol g_k for the n-fold cover, reduced to normal form."""
    k %= n
    if k == 0:
        return -Qi()
    if 2 * k == n:
        return Qi() * R() * omega()
    if 2 * k < n:
        return SymExpr.gen(f"g{n}_{k}")
    return Qi() / SymExpr.gen(f"g{n}_{n - k}")


def eps_symbol(n: int, k: int) -> SymExpr:
    """The epsilon symbol E_k: E_k E_{n-k} = Qi Z^-2 x^-2, E_0 = 1."""
    k %= n
    Z, x = SymExpr.gen("Z"), SymExpr.gen("x")
    if k == 0:
        return ONE
    if 2 * k == n:
        return R() ** -1 * Z**-1 * x**-1 * omega()
    if 2 * k < n:
        return SymExpr.gen(f"E{n}_{k}")
    return Qi() * Z**-2 * x**-2 / SymExpr.gen(f"E{n}_{n - k}")


def _n_of(e: SymExpr) -> int | None:
    for v in e.vals:
        for s in _gens_of(v):
            m = _NAME_RE.match(s)
            if m and m.group(3):
                return int(m.group(3))
    return None


# ---------------------------------------------------------------------------
# Rendering


def _sym_display(name: str, latex: bool) -> str:
    m = _NAME_RE.match(name)
    if name == "R":
        return "R"
    if m.group(2):
        return f"t_{{{m.group(2)}}}" if latex else name
    if name in ("Z", "x"):
        return name
    if m.group(3):
        n, k = int(m.group(3)), int(m.group(4))
        signed = k if 2 * k <= n else k - n
        return f"\\mathbf{{g}}_{{{signed}}}" if latex else name
    n, k = int(m.group(5)), int(m.group(6))
    signed = k if 2 * k <= n else k - n
    return f"E_{{{signed}}}" if latex else name


def _mono_factors(gens: Sequence[str], exps: Sequence[int]) -> list[tuple[str, int]]:
    """Display factors with R^e rewritten as Qi^a R^b, b in {0, 1}, and Gauss
    symbols in the denominator moved up via g_k^-1 = g_{n-k} Qi^-1."""
    factors: list[tuple[str, int]] = []
    qi = 0
    r_exp = 0
    for g, e in zip(gens, exps):
        if e == 0:
            continue
        m = _NAME_RE.match(g)
        if g == "R":
            r_exp += e
        elif m.group(3) and e < 0:
            n, k = int(m.group(3)), int(m.group(4))
            factors.append((f"g{n}_{n - k}", -e))
            qi += e
        elif m.group(5) and e < 0:
            n, k = int(m.group(5)), int(m.group(6))
            factors.append((f"E{n}_{n - k}", -e))
            # E_k^-1 = E_{n-k} Qi^-1 Z^2 x^2
            qi += e
            factors.append(("Z", -2 * e))
            factors.append(("x", -2 * e))
        else:
            factors.append((g, e))
    a, b = divmod(r_exp, 2)
    qi -= a
    merged: dict[str, int] = {}
    for g, e in factors:
        merged[g] = merged.get(g, 0) + e
    out = []
    if qi:
        out.append(("Qi", qi))
    if b:
        out.append(("R", 1))
    for g in sorted(merged, key=_gen_key):
        if merged[g]:
            out.append((g, merged[g]))
    return out


def _factor_text(name: str, e: int, latex: bool) -> str:
    base = ("q^{-1}" if latex else "Qi") if name == "Qi" else _sym_display(name, latex)
    if e == 1:
        return base
    if latex:
        if name == "Qi":
            return f"q^{{{-e}}}"
        return f"{base}^{{{e}}}"
    return f"{base}^{e}"


def _order_key(factors: list[tuple[str, int]]) -> tuple:
    order = {"Qi": (-1, 0, 0)}
    degree = sum(abs(e) for _, e in factors)
    return (degree, tuple((order.get(g) or _gen_key(g), e) for g, e in factors))


def _poly_terms(poly, gens: Sequence[str], shift: Sequence[int]) -> list[tuple[Fraction, list[tuple[str, int]]]]:
    out = []
    for monom, coeff in poly.terms():
        exps = [a - s for a, s in zip(monom, shift)]
        c = Fraction(int(coeff.numerator), int(coeff.denominator))
        out.append((c, _mono_factors(gens, exps)))
    out.sort(key=lambda t: _order_key(t[1]))
    return out


def _terms_text(terms, latex: bool) -> str:
    pieces = []
    for i, (c, factors) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        c = abs(c)
        body = [_factor_text(g, e, latex) for g, e in factors]
        if c != 1 or not body:
            if latex and c.denominator != 1:
                cs = f"\\frac{{{c.numerator}}}{{{c.denominator}}}"
            else:
                cs = str(c)
            body = [cs] + body
        text = (" " if latex else "*").join(body)
        if i == 0:
            pieces.append(("-" if sign == "-" else "") + text)
        else:
            pieces.append(f" {sign} {text}")
    return "".join(pieces) if pieces else "0"


def _render_fraction(f: FracElement, latex: bool) -> str:
    gens = _gens_of(f)
    num, den = f.numer, f.denom
    # pull the monomial content of the denominator into the numerator
    den_exps = [m for m, _ in den.terms()]
    shift = [min(e[i] for e in den_exps) for i in range(len(gens))]
    den_terms = _poly_terms(den, gens, shift)
    lead = den_terms[0][0]
    num_terms = [(c / lead, fs) for c, fs in _poly_terms(num, gens, shift)]
    den_terms = [(c / lead, fs) for c, fs in den_terms]
    num_s = _terms_text(num_terms, latex)
    if len(den_terms) == 1 and den_terms[0][0] == 1 and not den_terms[0][1]:
        return num_s
    den_s = _terms_text(den_terms, latex)
    if latex:
        return f"\\frac{{{num_s}}}{{{den_s}}}"
    return f"({num_s})/({den_s})"


def _render(e: SymExpr, latex: bool) -> str:
    parts = e._sign_parts()
    if not parts:
        return "0"
    out = []
    for names, coeff in parts:
        body = _render_fraction(coeff, latex)
        if names:
            syms = [("\\omega" if n == "w" else "h") if latex else n for n in names]
            joiner = " " if latex else "*"
            body = f"({body}){joiner}{joiner.join(syms)}" if latex is False else f"\\left({body}\\right) " + " ".join(syms)
        out.append(body)
    return (" + ").join(out)


# ---------------------------------------------------------------------------
# Parsing


def from_sympy(expr: sympy.Expr, n: int | None = None, extra: Mapping[str, SymExpr] | None = None) -> SymExpr:
    extra = dict(extra or {})

    def conv(e) -> SymExpr:
        if e.is_Integer or e.is_Rational:
            return SymExpr.const(Fraction(int(e.p), int(e.q)))
        if e.is_Symbol:
            name = str(e)
            if name in extra:
                return extra[name]
            if name == "Qi":
                return Qi()
            if name in SIGN_SYMBOLS:
                return SymExpr.sign(name)
            m = _NAME_RE.match(name)
            if m is None:
                raise MetacoeffError("BAD_SYMBOL", f"unknown symbol {name!r}")
            if m.group(3):
                return gauss(int(m.group(3)), int(m.group(4)))
            if m.group(5):
                return eps_symbol(int(m.group(5)), int(m.group(6)))
            return SymExpr.gen(name)
        if e.is_Add:
            out = ZERO
            for a in e.args:
                out = out + conv(a)
            return out
        if e.is_Mul:
            out = ONE
            for a in e.args:
                out = out * conv(a)
            return out
        if e.is_Pow and e.exp.is_Integer:
            return conv(e.base) ** int(e.exp)
        raise MetacoeffError("BAD_EXPRESSION", f"cannot convert {e}")

    return conv(expr)


def parse(text: str) -> SymExpr:
    """Inverse of SymExpr.to_text."""
    if text.strip() == "0":
        return ZERO
    names = set(re.findall(r"[A-Za-z][A-Za-z0-9_]*", text))
    local = {nm: sympy.Symbol(nm) for nm in names}
    try:
        expr = sympy.sympify(text.replace("^", "**"), locals=local)
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise MetacoeffError("BAD_EXPRESSION", f"cannot parse {text!r}") from e
    return from_sympy(expr)


# ---------------------------------------------------------------------------
# Matrices


class SymMatrix:
    """Square matrix of SymExpr with coset-representative labels."""

    __slots__ = ("labels", "entries")

    def __init__(self, labels: Sequence, entries: Sequence[Sequence[SymExpr]]):
        self.labels = tuple(labels)
        self.entries = tuple(tuple(SymExpr.coerce(x) for x in row) for row in entries)
        if len(self.entries) != len(self.labels) or any(len(r) != len(self.labels) for r in self.entries):
            raise MetacoeffError("BAD_MATRIX", "matrix must be square with one label per row")

    @staticmethod
    def zeros(labels: Sequence) -> list[list[SymExpr]]:
        return [[ZERO] * len(labels) for _ in labels]

    @staticmethod
    def identity(labels: Sequence) -> "SymMatrix":
        d = len(labels)
        return SymMatrix(labels, [[ONE if i == j else ZERO for j in range(d)] for i in range(d)])

    @property
    def size(self) -> int:
        return len(self.labels)

    def __getitem__(self, ij: tuple[int, int]) -> SymExpr:
        return self.entries[ij[0]][ij[1]]

    def entry(self, row_label, col_label) -> SymExpr:
        return self.entries[self.labels.index(tuple(row_label))][self.labels.index(tuple(col_label))]

    def support(self) -> set[tuple[int, int]]:
        return {(i, j) for i, r in enumerate(self.entries) for j, v in enumerate(r) if not v.is_zero()}

    def __matmul__(self, other: "SymMatrix") -> "SymMatrix":
        d = self.size
        if other.size != d:
            raise MetacoeffError("BAD_MATRIX", "size mismatch")
        nz_other = [[(j, v) for j, v in enumerate(row) if not v.is_zero()] for row in other.entries]
        out = SymMatrix.zeros(self.labels)
        for i in range(d):
            acc: dict[int, SymExpr] = {}
            for k, a in enumerate(self.entries[i]):
                if a.is_zero():
                    continue
                for j, b in nz_other[k]:
                    acc[j] = acc[j] + a * b if j in acc else a * b
            for j, v in acc.items():
                out[i][j] = v
        return SymMatrix(self.labels, out)

    def scale(self, s: SymExpr) -> "SymMatrix":
        return SymMatrix(self.labels, [[v * s for v in r] for r in self.entries])

    def transpose(self) -> "SymMatrix":
        return SymMatrix(self.labels, [list(c) for c in zip(*self.entries)])

    def trace(self) -> SymExpr:
        out = ZERO
        for i in range(self.size):
            out = out + self.entries[i][i]
        return out

    def det(self) -> SymExpr:
        return sym_det([list(r) for r in self.entries])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self.size == other.size and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)
        )

    def permuted(self, order: Sequence[int]) -> "SymMatrix":
        """Same operator written in the reordered basis."""
        return SymMatrix(
            [self.labels[i] for i in order], [[self.entries[i][j] for j in order] for i in order]
        )

    def to_text(self) -> str:
        lines = ["labels: " + " ".join(str(list(l)) for l in self.labels)]
        for lab, row in zip(self.labels, self.entries):
            lines.append(f"{list(lab)}: [" + ", ".join(v.to_text() for v in row) + "]")
        return "\n".join(lines)

    def to_latex(self) -> str:
        rows = [" & ".join(v.to_latex() for v in row) for row in self.entries]
        return "\\begin{pmatrix}\n" + " \\\\\n".join(rows) + "\n\\end{pmatrix}"

    def to_json(self) -> dict:
        return {
            "labels": [list(l) for l in self.labels],
            "entries": [[v.to_text() for v in row] for row in self.entries],
        }

    @staticmethod
    def from_json(doc: Mapping) -> "SymMatrix":
        return SymMatrix([tuple(l) for l in doc["labels"]], [[parse(v) for v in row] for row in doc["entries"]])


# ---------------------------------------------------------------------------
# Determinants


def _perm_parity(order: Sequence[int]) -> int:
    seen = [False] * len(order)
    sign = 1
    for s in range(len(order)):
        j, length = s, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length and length % 2 == 0:
            sign = -sign
    return sign


def _bareiss_field(m: list[list[FracElement]]) -> FracElement:
    """Fraction-free elimination over the polynomial ring; divisions are exact."""
    k = len(m)
    if k == 0:
        return None
    fld = m[0][0].field
    ring = fld.ring
    # clear denominators row by row
    scale = fld.one
    rows = []
    for r in m:
        l = ring.one
        for v in r:
            if v != 0:
                l = l.lcm(v.denom)
        rows.append([(v * l).numer if v != 0 else ring.zero for v in r])
        scale = scale * fld(l)
    a = rows
    sign = 1
    prev = ring.one
    for p in range(k - 1):
        piv = None
        best = None
        for i in range(p, k):
            if a[i][p] != 0:
                size = len(a[i][p].terms())
                if best is None or size < best:
                    piv, best = i, size
        if piv is None:
            return fld.zero
        if piv != p:
            a[p], a[piv] = a[piv], a[p]
            sign = -sign
        app = a[p][p]
        for i in range(p + 1, k):
            aip = a[i][p]
            for j in range(p + 1, k):
                v = app * a[i][j] - aip * a[p][j]
                a[i][j] = v.exquo(prev) if prev != ring.one else v
            a[i][p] = ring.zero
        prev = app
    return fld(a[k - 1][k - 1]) * sign / scale


def _det_block(m: list[list[FracElement]]) -> FracElement:
    if len(m) == 1:
        return m[0][0]
    if len(m) == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return _bareiss_field(m)


def sym_det(entries: list[list[SymExpr]]) -> SymExpr:
    """Determinant: split into connected blocks, Bareiss each, per sign branch."""
    d = len(entries)
    if d == 0:
        return ONE
    flat = [v for row in entries for v in row]
    signs, aligned = SymExpr._align(*flat)
    # union-find on rows (0..d-1) and columns (d..2d-1)
    parent = list(range(2 * d))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(d):
        for j in range(d):
            if not entries[i][j].is_zero():
                parent[find(i)] = find(d + j)
    comps: dict[int, tuple[list[int], list[int]]] = {}
    for i in range(d):
        comps.setdefault(find(i), ([], []))[0].append(i)
    for j in range(d):
        comps.setdefault(find(d + j), ([], []))[1].append(j)
    blocks = sorted(comps.values(), key=lambda rc: (rc[0] or [d])[0])
    if any(len(r) != len(c) for r, c in blocks):
        return ZERO
    row_order = [i for r, _ in blocks for i in r]
    col_order = [j for _, c in blocks for j in c]
    sign = _perm_parity(row_order) * _perm_parity(col_order)
    branch_dets = []
    for b in range(len(aligned[0])):
        val = None
        for rows, cols in blocks:
            sub = [[aligned[i * d + j][b] for j in cols] for i in rows]
            bd = _det_block(sub)
            val = bd if val is None else val * bd
        branch_dets.append(val * sign)
    return SymExpr._make(signs, branch_dets)
