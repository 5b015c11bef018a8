"""Named verification suites shared by the CLI and the acceptance tests.

Each suite returns a list of SuiteItem; a suite passes when every item is ok.
Grids: "default" is the full grid, "quick" a smaller one for fast checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .catalog import Family, all_families, classical_families, exceptional_families
from .cover import CoverDatum, bisector_from_q_short, build_cover, dual_datum, dual_period, gl_bisector
from .errors import MetacoeffError
from .gl2sl2 import (
    Explicit4Variant,
    explicit4_matrix,
    explicit4_trace_expected,
    gl2_det_trace_verify,
    identity_suite,
    kp_constants,
    restriction_blocks,
    twisted_det4,
    unramified_det4,
    v,
    whittaker_dimension,
)
from .orbits import alpha_counts, coset_space, enumerated_counts, exceptional_set, fixed_count_bW, fixed_points
from .poincare import SweepResult, detect_recurrence, sweep, to_rational_series
from .rootdata import RootDatum, build_root_datum
from .exactlin import IntMatrix
from .symlcm import (
    adjoint_gamma_product,
    aux_lemma_check,
    casselman_shalika_check,
    local_coeff_matrix,
    trace_closed_form,
    verify_det_T_M1,
)

GRIDS = ("default", "quick")
NAIVE_MAX_D = 10_000


@dataclass(frozen=True)
class SuiteItem:
    suite: str
    name: str
    ok: bool
    detail: str = ""

    @property
    def status(self) -> str:
        return "OK" if self.ok else "MISMATCH"

    def to_json(self) -> dict:
        return {"suite": self.suite, "name": self.name, "status": self.status, "detail": self.detail}


def _sweep_max(grid: str) -> int:
    return 48 if grid == "default" else 24


def _table_families() -> list[Family]:
    return classical_families() + exceptional_families()


@lru_cache(maxsize=None)
def _family_sweep(name: str, n_max: int, jobs: int) -> SweepResult:
    from .catalog import family

    d, D = family(name).build()
    return sweep(d, D, n_max, jobs)


def _table_suite(suite: str, grid: str, jobs: int, exc: bool) -> list[SuiteItem]:
    n_max = _sweep_max(grid)
    out = []
    for f in _table_families():
        s = _family_sweep(f.name, n_max, jobs)
        seq = s.exc_seq if exc else s.b_seq
        pred = f.exc_table if exc else f.b_table
        bad = [n for n in range(1, n_max + 1) if (seq[n - 1] == 1) != pred(n)]
        out.append(SuiteItem(suite, f"{f.name} n<={n_max}", not bad, f"disagrees at n={bad}" if bad else ""))
    return out


def suite_table1(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    return _table_suite("table1", grid, jobs, exc=False)


def suite_table2(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    return _table_suite("table2", grid, jobs, exc=True)


def suite_poincare6(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    n_max = _sweep_max(grid)
    out = []
    for f in all_families():
        s = _family_sweep(f.name, n_max, jobs)
        for label, seq, expected in (("P_W", s.b_seq, f.p_w), ("P_exc", s.exc_seq, f.p_exc)):
            found = to_rational_series(seq, detect_recurrence(seq))
            ok = found.equals(expected) and expected.expand(n_max) == list(seq)
            detail = "" if ok else f"found {found.to_text()}, expected {expected.to_text()}"
            out.append(SuiteItem("poincare6", f"{f.name} {label}", ok, detail))
    return out


def suite_bounds(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    """Fixed-point bounds at every grid point and periodicity of the dual data."""
    n_max = _sweep_max(grid)
    out = []
    for f in all_families():
        s = _family_sweep(f.name, n_max, jobs)
        out.append(SuiteItem("bounds", f"{f.name} bounds", not s.bound_violations, "; ".join(s.bound_violations)))
        if not f.almost_simple:
            continue
        d, D = f.build()
        try:
            p = dual_period(d, D, n_max)
        except MetacoeffError as e:
            out.append(SuiteItem("bounds", f"{f.name} period", False, str(e)))
            continue
        sigs = [dual_datum(CoverDatum(d, D, n)).signature() for n in range(1, 2 * p.period + 1)]
        ok = all(sigs[i] == sigs[i + p.period] for i in range(p.period))
        out.append(SuiteItem("bounds", f"{f.name} period={p.period}", ok))
    return out


def tm1_grid(grid: str = "default") -> list[tuple[str, RootDatum, IntMatrix, range]]:
    sl2 = build_root_datum("SL2")
    gl2 = build_root_datum("GL", 2)
    sp4 = build_root_datum("C", 2, "sc")
    g2 = build_root_datum("G2")
    if grid == "quick":
        ns = (range(1, 6), range(1, 4), range(1, 4), range(1, 3))
    else:
        ns = (range(1, 9), range(1, 6), range(1, 7), range(1, 5))
    return [
        ("SL2", sl2, bisector_from_q_short(sl2, 1), ns[0]),
        ("GL2(0,1)", gl2, gl_bisector(2, 0, 1), ns[1]),
        ("Sp4", sp4, bisector_from_q_short(sp4, 1), ns[2]),
        ("G2", g2, bisector_from_q_short(g2, 1), ns[3]),
    ]


def suite_tm1(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    out = []
    for name, d, D, ns in tm1_grid(grid):
        for n in ns:
            c = build_cover(d, D, n)
            for a in range(d.semisimple_rank):
                r = verify_det_T_M1(c, a)
                detail = "" if r.ok else f"det {r.lhs.to_text()} vs {r.rhs.to_text()}"
                out.append(SuiteItem("tm1", f"{name} n={n} alpha={a + 1}", r.ok, detail))
    return out


def suite_trace(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    sl2 = build_root_datum("SL2")
    D = bisector_from_q_short(sl2, 1)
    out = []
    for n in range(1, 9 if grid == "default" else 6):
        c = build_cover(sl2, D, n)
        tr = local_coeff_matrix(c, None, 0).trace()
        cf = trace_closed_form(c)
        ok = tr == cf
        out.append(SuiteItem("trace", f"SL2 n={n}", ok, "" if ok else f"{tr.to_text()} vs {cf.to_text()}"))
    for n in range(2, 13 if grid == "default" else 7):
        out.append(SuiteItem("trace", f"aux lemma n={n}", aux_lemma_check(n)))
    return out


def suite_cs(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    sl2 = build_root_datum("SL2")
    gl2 = build_root_datum("GL", 2)
    sp4 = build_root_datum("C", 2, "sc")
    cases = [
        ("SL2", sl2, bisector_from_q_short(sl2, 1), (3, 5)),
        ("GL2(0,1)", gl2, gl_bisector(2, 0, 1), (2, 3)),
        ("Sp4", sp4, bisector_from_q_short(sp4, 1), (3,)),
    ]
    out = []
    for name, d, D, ns in cases:
        for n in ns:
            r = casselman_shalika_check(build_cover(d, D, n), count=3)
            ok = r.ok and len(r.checked) >= 3
            detail = f"z={r.z} checked={len(r.checked)}" + ("" if r.ok else " " + "; ".join(r.failures))
            out.append(SuiteItem("cs", f"{name} n={n}", ok, detail))
    return out


def suite_adjoint(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    sl2 = build_root_datum("SL2")
    gl2 = build_root_datum("GL", 2)
    sp4 = build_root_datum("C", 2, "sc")
    cases = [
        ("Sp4 Siegel", sp4, bisector_from_q_short(sp4, 1), 3, (0,)),
        ("Sp4 Klingen", sp4, bisector_from_q_short(sp4, 1), 3, (1,)),
        ("GL2(0,1) Borel", gl2, gl_bisector(2, 0, 1), 3, ()),
        ("SL2 Borel", sl2, bisector_from_q_short(sl2, 1), 5, ()),
    ]
    out = []
    for name, d, D, n, theta in cases:
        r = adjoint_gamma_product(build_cover(d, D, n), theta)
        detail = "" if r.ok else f"{r.eigenvalue.to_text()} vs {r.product.to_text()}"
        out.append(SuiteItem("adjoint", f"{name} n={n}", r.ok, detail))
    return out


def naive_covers(grid: str = "default") -> list[tuple[str, CoverDatum]]:
    """Covers for the enumeration oracle: tm1 grid plus catalog families, d <= NAIVE_MAX_D."""
    out = []
    for name, d, D, ns in tm1_grid(grid):
        out += [(f"{name} n={n}", build_cover(d, D, n)) for n in ns]
    n_top = 8 if grid == "default" else 4
    for f in all_families():
        d, D = f.build()
        for n in range(1, n_top + 1):
            c = build_cover(d, D, n)
            if c.quotient.is_finite and c.quotient.index <= NAIVE_MAX_D:
                out.append((f"{f.name} n={n}", c))
    return out


def naive_check(c: CoverDatum) -> tuple[bool, str]:
    s = coset_space(c, NAIVE_MAX_D)
    e = enumerated_counts(s)
    k = c.datum.semisimple_rank
    problems = []
    congruence = tuple(alpha_counts(c, i)[0] for i in range(k))
    if e.b_alpha != congruence:
        problems.append(f"b_alpha {e.b_alpha} vs {congruence}")
    bw = fixed_count_bW(c)
    if e.b_W != bw:
        problems.append(f"b_W {e.b_W} vs {bw}")
    if list(e.fixed) != fixed_points(s):
        problems.append("fixed point lists differ")
    ex = exceptional_set(c)
    if not ex.empty and s.rep(ex.point()) not in {s.rep(y) for y in e.fixed}:
        problems.append("exceptional point is not W-fixed")
    if ex.image_count > e.b_W:
        problems.append("exceptional image exceeds b_W")
    return not problems, "; ".join(problems)


def suite_naivels(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    out = []
    for name, c in naive_covers(grid):
        ok, detail = naive_check(c)
        out.append(SuiteItem("naivels", f"{name} d={c.quotient.index}", ok, detail))
    return out


def suite_gl2(grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    out = []
    for n in range(1, 13):
        for c in range(-3, 4):
            b = restriction_blocks(kp_constants(n, c))
            w = whittaker_dimension(n, c)
            out.append(SuiteItem("gl2", f"blocks n={n} c={c}", b.dimension == w, f"{b.block_count}x{b.block_size} vs {w}"))
    for n in (4, 8):
        d = n // 2
        vd = v() ** d
        for variant, expected in (
            (Explicit4Variant.UNRAMIFIED_CHI, unramified_det4(n, vd)),
            (Explicit4Variant.TWIST_BY_VARPI_INVERSE, twisted_det4(n, vd)),
        ):
            m = explicit4_matrix(n, variant)
            out.append(SuiteItem("gl2", f"explicit4 det n={n} {variant.value}", m.det() == expected))
        tr = explicit4_matrix(n).trace()
        out.append(SuiteItem("gl2", f"explicit4 trace n={n}", tr == explicit4_trace_expected(n)))
    ns = (1, 2, 3, 4, 5, 6, 7, 8, 10, 12) if grid == "default" else (2, 3, 4, 6)
    for n in ns:
        for c in (0, 1):
            r = gl2_det_trace_verify(n, c)
            detail = f"det {r.det_lhs.to_text()} trace {r.trace_lhs.to_text()}"
            out.append(SuiteItem("gl2", f"detformgl n={n} c={c}", r.ok, detail))
    for r in identity_suite():
        detail = "" if r.ok else f"{r.lhs} vs {r.rhs}"
        out.append(SuiteItem("gl2", f"{r.identity} {r.params}".strip(), r.ok, detail))
    return out


SUITES: dict[str, Callable[..., list[SuiteItem]]] = {
    "table1": suite_table1,
    "table2": suite_table2,
    "poincare6": suite_poincare6,
    "tm1": suite_tm1,
    "trace": suite_trace,
    "cs": suite_cs,
    "naivels": suite_naivels,
    "gl2": suite_gl2,
    "adjoint": suite_adjoint,
    "bounds": suite_bounds,
}

DEFAULT_SUITES = ("table1", "table2", "poincare6", "tm1", "trace", "cs", "naivels", "gl2")


def run_suite(name: str, grid: str = "default", jobs: int = 1) -> list[SuiteItem]:
    if name not in SUITES:
        raise MetacoeffError("BAD_ARGUMENT", f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if grid not in GRIDS:
        raise MetacoeffError("BAD_ARGUMENT", f"unknown grid {grid!r}; choose from {', '.join(GRIDS)}")
    return SUITES[name](grid, jobs)
