"""Command-line interface: cover queries, matrices and verification suites."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Any, Callable

import click

from .cover import CoverDatum, bisector_from_q_short, build_cover, dual_datum, metaplectic_class
from .errors import CapExceeded, MetacoeffError
from .exactlin import IntMatrix
from .orbits import (
    DEFAULT_ENUMERATION_CAP,
    alpha_counts,
    centered_reps,
    classify,
    coset_space,
    exceptional_set,
    fixed_count_bW,
    fixed_points,
    perm_sign,
)
from .poincare import detect_recurrence, sweep, to_rational_series
from .rootdata import FAMILIES, build_root_datum

SCHEMA = 1
OUTPUTS = ("text", "json", "latex")
CLASS_LIST_MAX = 64
FAILURE_CODES = {"INTERNAL", "MISMATCH", "IDENTITY_FAILED"}


# ---------------------------------------------------------------------------
# Cover specification


@dataclass
class CoverSpec:
    family: str | None = None
    rank: int | None = None
    isogeny: str | None = None
    D: list[list[int]] | None = None
    q_short: int | None = None
    n: int | None = None
    eps: str = "+1"
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    output: str = "text"

    @staticmethod
    def from_json(doc: Any) -> "CoverSpec":
        if not isinstance(doc, dict):
            raise MetacoeffError("BAD_SPEC", "cover spec must be an object")
        allowed = {"family", "rank", "isogeny", "D", "n", "options"}
        unknown = set(doc) - allowed
        if unknown:
            raise MetacoeffError("BAD_SPEC", f"unknown fields: {', '.join(sorted(unknown))}")
        spec = CoverSpec(family=doc.get("family"), rank=doc.get("rank"), isogeny=doc.get("isogeny"), n=doc.get("n"))
        D = doc.get("D")
        if isinstance(D, dict):
            if set(D) != {"q_short"}:
                raise MetacoeffError("BAD_SPEC", "D shorthand must be {\"q_short\": integer}")
            spec.q_short = D["q_short"]
        elif D is not None:
            spec.D = D
        options = doc.get("options", {})
        if not isinstance(options, dict):
            raise MetacoeffError("BAD_SPEC", "options must be an object")
        unknown = set(options) - {"eps", "enumeration_cap", "output"}
        if unknown:
            raise MetacoeffError("BAD_SPEC", f"unknown options: {', '.join(sorted(unknown))}")
        for key in ("eps", "enumeration_cap", "output"):
            if key in options:
                setattr(spec, key, options[key])
        return spec

    def merged(self, **overrides: Any) -> "CoverSpec":
        out = CoverSpec(**{f.name: getattr(self, f.name) for f in fields(self)})
        for key, value in overrides.items():
            if value is not None:
                setattr(out, key, value)
        if overrides.get("D") is not None:
            out.q_short = None
        elif overrides.get("q_short") is not None:
            out.D = None
        return out

    def validate(self, need_n: bool = True) -> None:
        if self.family is None:
            raise MetacoeffError("BAD_SPEC", "a family is required")
        if self.family not in FAMILIES:
            raise MetacoeffError("UNSUPPORTED_SPEC", f"unknown family {self.family!r}")
        if self.D is None and self.q_short is None:
            raise MetacoeffError("BAD_SPEC", "give either D or q_short")
        if need_n and (not isinstance(self.n, int) or self.n < 1):
            raise MetacoeffError("BAD_SPEC", "n must be a positive integer")
        if str(self.eps) not in ("+1", "1"):
            raise MetacoeffError("EPSILON_UNSUPPORTED", "only eps = +1 is supported")
        if self.output not in OUTPUTS:
            raise MetacoeffError("BAD_SPEC", f"output must be one of {', '.join(OUTPUTS)}")
        if not isinstance(self.enumeration_cap, int) or self.enumeration_cap < 1:
            raise MetacoeffError("BAD_SPEC", "enumeration_cap must be a positive integer")

    def datum_and_form(self):
        d = build_root_datum(self.family, self.rank, self.isogeny)
        D = IntMatrix.from_rows(self.D) if self.D is not None else bisector_from_q_short(d, self.q_short)
        return d, D

    def cover(self) -> CoverDatum:
        d, D = self.datum_and_form()
        return build_cover(d, D, self.n)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "rank": self.rank,
            "isogeny": self.isogeny,
            "D": self.D if self.D is not None else {"q_short": self.q_short},
            "n": self.n,
        }


def _parse_matrix(text: str) -> list[list[int]]:
    text = text.strip()
    try:
        if text.startswith("["):
            rows = json.loads(text)
        else:
            rows = [[int(x) for x in row.split(",")] for row in text.split(";")]
    except (ValueError, json.JSONDecodeError) as e:
        raise MetacoeffError("BAD_SPEC", f"cannot parse matrix {text!r}") from e
    if not isinstance(rows, list) or not all(isinstance(r, list) and all(isinstance(x, int) for x in r) for r in rows):
        raise MetacoeffError("BAD_SPEC", "D must be a list of integer rows")
    return rows


def _load_spec(path: str | None) -> CoverSpec:
    if path is None:
        return CoverSpec()
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise MetacoeffError("BAD_SPEC", f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise MetacoeffError("BAD_SPEC", f"{path} is not valid JSON: {e.msg}") from e
    return CoverSpec.from_json(doc)


def _resolve(opts: dict, need_n: bool = True) -> CoverSpec:
    spec = _load_spec(opts.pop("spec_path"))
    D = opts.pop("D")
    spec = spec.merged(D=_parse_matrix(D) if D is not None else None, **opts)
    spec.validate(need_n)
    return spec


def cover_options(f: Callable) -> Callable:
    decorators = [
        click.option("--spec", "spec_path", type=click.Path(dir_okay=False), help="JSON cover spec file."),
        click.option("--family", type=click.Choice(FAMILIES), help="Root datum family."),
        click.option("--rank", type=int, help="Rank (omit for exceptional types and SL2)."),
        click.option("--isogeny", type=click.Choice(["sc", "ad"]), help="Isogeny type."),
        click.option("--q-short", "q_short", type=int, help="Q on short coroots; builds the standard bisector."),
        click.option("--D", "D", help="Full bisector D, rows separated by ';' or as JSON."),
        click.option("--n", "n", type=int, help="Degree of the cover."),
        click.option("--eps", type=str, help="Sign regime; only +1 is supported."),
        click.option("--cap", "enumeration_cap", type=int, help="Coset enumeration cap."),
        click.option("--output", type=click.Choice(OUTPUTS), help="Output format."),
    ]
    for dec in reversed(decorators):
        f = dec(f)
    return f


# ---------------------------------------------------------------------------
# Rendering


def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def _text_value(x: Any) -> str:
    if isinstance(x, (list, tuple, dict)):
        return json.dumps(_jsonable(x), sort_keys=True)
    if x is None:
        return "none"
    return str(x)


def render(result: dict, output: str, latex: str | None = None) -> str:
    if output == "json":
        doc = {"schema": SCHEMA, **_jsonable(result)}
        return json.dumps(doc, sort_keys=True, indent=2)
    if output == "latex":
        if latex is None:
            raise MetacoeffError("BAD_ARGUMENT", "LaTeX output is not available for this command")
        return latex
    lines = []
    for key, value in result.items():
        if isinstance(value, str) and "\n" in value:
            lines.append(f"{key} =")
            lines += ["  " + line for line in value.splitlines()]
        else:
            lines.append(f"{key} = {_text_value(value)}")
    return "\n".join(lines)


def _emit(result: dict, output: str, latex: str | None = None) -> None:
    click.echo(render(result, output, latex))


def _index(c: CoverDatum) -> int | str:
    q = c.quotient
    return q.index if q.is_finite else "infinite"


# ---------------------------------------------------------------------------
# Commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli() -> None:
    """Invariants of local coefficients matrices for covering groups."""


@cli.command()
@cover_options
def dual(**opts: Any) -> int:
    """Dual root datum, center and fundamental group."""
    spec = _resolve(opts)
    c = spec.cover()
    dd = dual_datum(c)
    k = c.datum.semisimple_rank
    result = {
        "cover": spec.to_json(),
        "d": _index(c),
        "n_alpha": [c.simple_n(i) for i in range(k)],
        "cartan_type": dd.cartan_type,
        "yqn_basis": [list(v) for v in dd.yqn_basis.columns()],
        "yqn_sc_basis": [list(v) for v in dd.yqn_sc_basis.columns()],
        "modified_coroots": [list(v) for v in dd.modified_coroots],
        "modified_roots": [list(v) for v in dd.modified_roots],
        "rho_qn": list(dd.rho_qn),
        "center_divisors": list(dd.center_divisors),
        "center_free_rank": dd.center_free_rank,
        "center_order": dd.center_order,
        "pi1_divisors": None if dd.pi1_divisors is None else list(dd.pi1_divisors),
        "pi1_order": dd.pi1_order,
        "metaplectic": str(metaplectic_class(c)),
    }
    _emit(result, spec.output)
    return 0


@cli.command()
@cover_options
def orbits(**opts: Any) -> int:
    """Coset space, per-root fixed counts and coset classes."""
    spec = _resolve(opts)
    c = spec.cover()
    s = coset_space(c, spec.enumeration_cap)
    k = c.datum.semisimple_rank
    per_root = []
    for i in range(k):
        b, a = alpha_counts(c, i)
        entry = {"alpha": i + 1, "n_alpha": c.simple_n(i), "b_alpha": b, "a_alpha": a}
        if s.reps is not None:
            entry["perm_sign"] = perm_sign(s, i)
        per_root.append(entry)
    result: dict[str, Any] = {"cover": spec.to_json(), "d": s.d, "roots": per_root, "b_W": fixed_count_bW(c)}
    if s.reps is not None:
        result["fixed_points"] = [list(y) for y in fixed_points(s)]
        if s.d <= CLASS_LIST_MAX:
            result["classes"] = [
                {"rep": list(y), "kinds": [classify(c, i, y).kind.value for i in range(k)]} for y in s.reps
            ]
    _emit(result, spec.output)
    return 0


@cli.command()
@cover_options
def bwn(**opts: Any) -> int:
    """Number of cosets fixed by the twisted Weyl action."""
    spec = _resolve(opts)
    c = spec.cover()
    _emit({"cover": spec.to_json(), "d": _index(c), "b_W": fixed_count_bW(c)}, spec.output)
    return 0


@cli.command()
@cover_options
def exc(**opts: Any) -> int:
    """Exceptional points and the number of cosets they meet."""
    spec = _resolve(opts)
    c = spec.cover()
    ex = exceptional_set(c)
    result = {
        "cover": spec.to_json(),
        "targets": list(ex.targets),
        "empty": ex.empty,
        "image_count": ex.image_count,
        "point": None if ex.empty else list(ex.point()),
    }
    _emit(result, spec.output)
    return 0


@cli.command()
@cover_options
@click.option("--n-max", "n_max", type=int, default=24, show_default=True, help="Largest degree in the sweep.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes for the sweep.")
def poincare(n_max: int, jobs: int, **opts: Any) -> int:
    """Sweep b_W and exceptional counts over n and fit rational generating functions."""
    spec = _resolve(opts, need_n=False)
    d, D = spec.datum_and_form()
    s = sweep(d, D, n_max, jobs)
    result: dict[str, Any] = {"cover": spec.to_json(), "n_max": n_max}
    latex = []
    for key, seq in (("b_W", s.b_seq), ("exc", s.exc_seq)):
        rec = detect_recurrence(seq)
        entry: dict[str, Any] = {"sequence": list(seq), "recurrence": str(rec), "rational_form": None}
        if rec:
            series = to_rational_series(seq, rec)
            entry["rational_form"] = series.to_json()
            latex.append(f"P_{{{key.replace('_', '')}}}(T) = " + series.to_latex())
        result[key] = entry
    result["pi1"] = list(s.pi1_seq)
    result["bound_violations"] = list(s.bound_violations)
    _emit(result, spec.output, "\n".join(latex))
    return 1 if s.bound_violations else 0


@cli.command()
@cover_options
@click.option("--alpha", type=int, default=1, show_default=True, help="Simple root index, starting at 1.")
@click.option(
    "--reps",
    "rep_choice",
    type=click.Choice(["centered", "canonical"]),
    default="centered",
    show_default=True,
    help="Coset representatives indexing rows and columns.",
)
def lcm(alpha: int, rep_choice: str, **opts: Any) -> int:
    """Scattering, change-of-basis and local coefficients matrices for one simple reflection."""
    from .symlcm import change_basis_matrix, det_rhs_T_M1, scattering_matrix

    spec = _resolve(opts)
    c = spec.cover()
    if not 1 <= alpha <= c.datum.semisimple_rank:
        raise MetacoeffError("BAD_ARGUMENT", f"alpha must be between 1 and {c.datum.semisimple_rank}")
    i = alpha - 1
    space = coset_space(c, spec.enumeration_cap)
    reps = centered_reps(space) if rep_choice == "centered" else space.require_reps()
    S = scattering_matrix(c, reps, i)
    C = change_basis_matrix(c, reps, i)
    M = S @ C
    det = M.det()
    rhs = det_rhs_T_M1(c, i)
    result = {
        "cover": spec.to_json(),
        "alpha": alpha,
        "S": S.to_json(),
        "C": C.to_json(),
        "M": M.to_json(),
        "det": det.to_text(),
        "det_check": "OK" if det == rhs else "MISMATCH",
        "trace": M.trace().to_text(),
    }
    latex = "\n".join(f"{name} = {m.to_latex()}" for name, m in (("S", S), ("C", C), ("M", M)))
    if spec.output == "text":
        result["S"], result["C"], result["M"] = S.to_text(), C.to_text(), M.to_text()
    _emit(result, spec.output, latex)
    return 0 if det == rhs else 1


@cli.command()
@click.option("--suite", "suites", multiple=True, help="Suite name; repeatable. Default: all listed suites.")
@click.option("--grid", type=click.Choice(["default", "quick"]), default="default", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes for sweeps.")
@click.option("--output", type=click.Choice(("text", "json")), default="text", show_default=True)
def verify(suites: tuple[str, ...], grid: str, jobs: int, output: str) -> int:
    """Run verification suites; exit 1 on any mismatch."""
    from .suites import DEFAULT_SUITES, run_suite

    names = suites or DEFAULT_SUITES
    items = [item for name in names for item in run_suite(name, grid, jobs)]
    failed = [x for x in items if not x.ok]
    if output == "json":
        doc = {
            "grid": grid,
            "suites": list(names),
            "items": [x.to_json() for x in items],
            "passed": len(items) - len(failed),
            "failed": len(failed),
        }
        click.echo(render(doc, "json"))
    else:
        for x in items:
            line = f"{x.status} {x.suite}: {x.name}"
            click.echo(line + (f" ({x.detail})" if x.detail and not x.ok else ""))
        click.echo(f"{len(items) - len(failed)}/{len(items)} passed")
    return 1 if failed else 0


@cli.command()
@click.option("--n", "n", type=int, required=True, help="Degree of the cover.")
@click.option("--c", "c", type=int, default=0, show_default=True, help="Twisting parameter.")
@click.option("--explicit4", is_flag=True, help="Include the 4 | n constituent matrices.")
@click.option("--identities", is_flag=True, help="Run the identity suite.")
@click.option("--output", type=click.Choice(OUTPUTS), default="text", show_default=True)
def gl2(n: int, c: int, explicit4: bool, identities: bool, output: str) -> int:
    """Kazhdan-Patterson GL_2 covers: blocks, determinant and trace."""
    from .gl2sl2 import (
        Explicit4Variant,
        explicit4_matrix,
        gl2_det_trace_verify,
        identity_suite,
        kp_constants,
        restriction_blocks,
        whittaker_dimension,
    )

    k = kp_constants(n, c)
    b = restriction_blocks(k)
    r = gl2_det_trace_verify(n, c)
    result: dict[str, Any] = {
        "n": n,
        "c": c,
        "constants": {"n_c": k.n_c, "d": k.d, "d_c": k.d_c},
        "blocks": {
            "count": b.block_count,
            "size": b.block_size,
            "constituents": [[label, mult] for label, mult in b.constituents],
        },
        "whittaker_dimension": whittaker_dimension(n, c),
        "status": r.status,
        "det": r.det_lhs.to_text(),
        "det_expected": r.det_rhs.to_text(),
        "trace": r.trace_lhs.to_text(),
        "trace_expected": r.trace_rhs.to_text(),
        "steps": [[name, ok] for name, ok in r.steps],
    }
    latex_parts = []
    if explicit4:
        mats = {v.value: explicit4_matrix(n, v) for v in Explicit4Variant}
        result["explicit4"] = {name: (m.to_text() if output == "text" else m.to_json()) for name, m in mats.items()}
        latex_parts = [f"M_{{\\mathrm{{{name}}}}} = {m.to_latex()}" for name, m in mats.items()]
    failed = not r.ok
    if identities:
        items = identity_suite()
        bad = [x for x in items if not x.ok]
        failed = failed or bool(bad)
        result["identities"] = {
            "passed": len(items) - len(bad),
            "failed": [{"identity": x.identity, "params": x.params, "lhs": x.lhs, "rhs": x.rhs} for x in bad],
        }
    _emit(result, output, "\n".join(latex_parts) if latex_parts else None)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Entry point


def exit_code(err: MetacoeffError) -> int:
    if isinstance(err, CapExceeded) or err.code == "CAP_EXCEEDED":
        return 3
    if err.code in FAILURE_CODES:
        return 1
    return 2


def main(argv: list[str] | None = None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="metacoeff", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except MetacoeffError as e:
        click.echo(f"error: {e}", err=True)
        return exit_code(e)
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
