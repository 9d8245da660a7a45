"""``flatlab`` command-line front end.

Functions are written in the variable ``u = 1/x``:
``exp(-(u))`` is e^{-1/x} and ``exp(-(4*u))*(u^2-3)`` is e^{-4/x}(x^-2 - 3).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from flatlab import census as census_mod
from flatlab import numeric, verify
from flatlab.cache import ENV_VAR, DerivativeCache, atomic_write_text
from flatlab.errors import FlatlabError, SpecParseError, ToleranceUnreachable
from flatlab.flatfun import nth_derivative
from flatlab.funcspec import parse_spec
from flatlab.laurent import DEFAULT_REL_WIDTH
from flatlab.report import EXIT_CODES, FAIL, PASS, qstr

DEFAULT_SPEC = "exp(-(u))"

_RATIONAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def rational(text: str) -> Fraction:
    """``a/b`` or integer text, exactly."""
    m = _RATIONAL.match(text)
    if not m or (m.group(2) is not None and int(m.group(2)) == 0):
        raise argparse.ArgumentTypeError(f"expected a rational 'a/b', got {text!r}")
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def tolerance(text: str) -> Fraction:
    """Like :func:`rational` but also accepts decimal/scientific text such as ``1e-10``."""
    try:
        q = rational(text)
    except argparse.ArgumentTypeError:
        try:
            q = Fraction(text.strip())  # exact: Fraction("1e-10") == 1/10**10
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad tolerance {text!r}") from None
    if q <= 0:
        raise argparse.ArgumentTypeError("tolerance must be > 0")
    return q


def positive_rational(text: str) -> Fraction:
    q = rational(text)
    if q <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive rational, got {text!r}")
    return q


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v
    return parse


nonneg_int = _int_at_least(0)
pos_int = _int_at_least(1)


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "flatlab"


def _cache(args) -> DerivativeCache:
    if args.no_cache:
        return DerivativeCache()
    return DerivativeCache(args.cache_dir or default_cache_dir())


def _emit(text: str, output: str | None) -> None:
    if output:
        atomic_write_text(output, text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- commands --------------------------------------------------------------


def cmd_census(args) -> int:
    f = parse_spec(args.f)
    cache = _cache(args)
    rows = []
    for row in census_mod.iter_census(f, args.n_max, cache, args.width):
        rows.append(row)
        if args.output:
            print(f"n={row.n} z={row.z} s={row.s}", flush=True)
    if args.format == "csv":
        doc = census_mod.rows_to_csv(rows)
    else:
        doc = _dump({"spec": f.spec(), "rows": [census_mod.row_to_json(r) for r in rows]})
    _emit(doc, args.output)
    if args.gap_report:
        atomic_write_text(args.gap_report, _dump(census_mod.gap_report(rows)))
    status = 0
    if args.checks:
        reports = [census_mod.check_s_monotone(rows), census_mod.check_z_monotone(rows),
                   census_mod.check_min_zero_decreasing(rows), census_mod.check_interlacing(rows)]
        for r in reports:
            print(f"{r.check}: {r.status}", file=sys.stderr)
        if any(r.status == FAIL for r in reports):
            status = EXIT_CODES[FAIL]
    if args.stats:
        print(f"recurrence_steps={cache.recurrence_steps}", file=sys.stderr)
    return status


def _write_report(report, args) -> int:
    text = report.dumps() + "\n"
    sys.stdout.write(text)
    if args.report:
        atomic_write_text(args.report, text)
    return report.exit_code


def cmd_verify(args) -> int:
    f = parse_spec(args.f)
    cache = _cache(args)
    if args.check == "theorem1":
        report = verify.theorem1_witness(f, args.n_max, cache).to_report()
    elif args.check == "lemma7":
        report = verify.lemma7_probe(f, args.N, args.p_max, args.x,
                                     precision_cap=args.precision_cap, cache=cache)
    else:
        inst = verify.Lemma4Instance.from_alpha(f, args.alpha, args.n)
        if args.check == "lemma4":
            report = verify.lemma4_check(inst, precision_cap=args.precision_cap)
        else:
            report = verify.numerator_check(inst, args.samples)
    return _write_report(report, args)


def cmd_gn(args) -> int:
    if not 0 < args.x <= 1:
        raise ValueError("x must lie in (0, 1]")
    result = numeric.gn(args.n, args.x, args.tol, budget=args.budget)
    if args.json:
        sys.stdout.write(_dump({"n": args.n, "x": qstr(args.x), **result.to_json()}))
    else:
        v = result.value.arb
        print(f"{v.mid().str(20, radius=False)} +/- {float(v.rad()):.3e}")
    return 0


def cmd_scan(args) -> int:
    if args.f is not None:
        fn = numeric.family_function(nth_derivative(parse_spec(args.f), args.n, _cache(args)))
    else:
        fn = numeric.gn_function(args.g)
    result = numeric.sign_scan(fn, args.lo, args.hi, args.grid, args.depth)
    _emit(_dump(result.to_json()), args.output)
    return 0


PLOT_COLUMNS = ["n", "x", "lo", "hi", "multiplicity", "sign_left", "sign_right"]


def cmd_plotdata(args) -> int:
    f = parse_spec(args.f)
    row = census_mod.make_row(args.n, nth_derivative(f, args.n, _cache(args)).L)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    # walk left to right starting from the sign next to x = 0
    sign = 1 if row.L.leading_coefficient > 0 else -1
    for b in row.zero_set.brackets:
        after = -sign if b.sign_change else sign
        w.writerow([row.n, f"{float(b.midpoint):.17g}", qstr(b.lo), qstr(b.hi),
                    b.multiplicity, "+" if sign > 0 else "-", "+" if after > 0 else "-"])
        sign = after
    _emit(buf.getvalue(), args.output)
    return 0


def cmd_cache(args) -> int:
    cache = DerivativeCache(args.cache_dir or default_cache_dir())
    if args.action == "info":
        sys.stdout.write(_dump({"directory": str(cache.directory), "files": cache.info()}))
    else:
        print(f"removed {cache.purge()} cache file(s) from {cache.directory}")
    return 0


# -- parser ----------------------------------------------------------------


def _add_cache_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cache-dir", help=f"derivative cache directory (default: ${ENV_VAR} "
                                       "or ~/.cache/flatlab)")
    p.add_argument("--no-cache", action="store_true", help="keep derivatives in memory only")


def _add_spec(p: argparse.ArgumentParser) -> None:
    p.add_argument("--f", default=DEFAULT_SPEC,
                   help="function spec in u = 1/x, e.g. 'exp(-(u))*(u^2-3)' "
                        f"(default: {DEFAULT_SPEC})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatlab",
        description="Zero census and verification tools for flat functions "
                    "exp(-p(u))*L(u), u = 1/x, on (0, 1].")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="z(n), s(n) and zero brackets for n = 0..n_max")
    _add_spec(p)
    p.add_argument("--n-max", type=nonneg_int, default=10)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", "-o", help="write rows here; a summary goes to stdout")
    p.add_argument("--gap-report", metavar="PATH", help="also write the gap report (JSON)")
    p.add_argument("--width", type=positive_rational, default=DEFAULT_REL_WIDTH,
                   help="relative isolation width (default 1/2^40)")
    p.add_argument("--checks", action="store_true",
                   help="run monotonicity and interlacing checks (stderr)")
    p.add_argument("--stats", action="store_true",
                   help="print the number of recurrence steps computed (stderr)")
    _add_cache_opts(p)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("verify", help="witness search and inequality checks")
    vsub = p.add_subparsers(dest="check", required=True)
    for name, help_text in [("theorem1", "least n with a zero or negative value of f^(n)"),
                            ("lemma4", "g(x)/g(1) < x^n for g(x) = f(alpha x)"),
                            ("numerator", "sign of x g'(x) - n g(x) at samples"),
                            ("lemma7", "least p with F(x) > x^p, F = f^(N)/f^(N)(1)")]:
        q = vsub.add_parser(name, help=help_text)
        _add_spec(q)
        _add_cache_opts(q)
        q.add_argument("--report", metavar="PATH", help="also write the JSON report here")
        if name == "theorem1":
            q.add_argument("--n-max", type=nonneg_int, default=30)
        elif name == "lemma7":
            q.add_argument("--N", type=nonneg_int, default=0)
            q.add_argument("--p-max", type=nonneg_int, default=20)
            q.add_argument("--x", type=rational, default=Fraction(1, 2))
        else:
            q.add_argument("--alpha", type=positive_rational, default=Fraction(1))
            q.add_argument("--n", type=nonneg_int, required=True)
        if name == "numerator":
            q.add_argument("--samples", type=rational, nargs="+",
                           help="sample points in (0, 1) (default: 1024 uniform + 64 geometric)")
        if name in ("lemma4", "lemma7"):
            q.add_argument("--precision-cap", type=pos_int, default=verify.PRECISION_CAP)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gn", help="enclosure of the n-fold integral g_n(x) of g0")
    p.add_argument("--n", type=pos_int, required=True)
    p.add_argument("--x", type=rational, required=True, help="rational point in (0, 1]")
    p.add_argument("--tol", type=tolerance, default=Fraction(1, 10**10),
                   help="radius bound, 'a/b' or e.g. 1e-10 (default 1e-10)")
    p.add_argument("--budget", type=pos_int, default=numeric.DEFAULT_BUDGET)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gn)

    p = sub.add_parser("scan", help="heuristic sign scan on [lo, hi]")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--g", type=nonneg_int, default=0, help="scan g_m (default g0)")
    src.add_argument("--f", help="scan the n-th derivative of this spec instead")
    p.add_argument("--n", type=nonneg_int, default=0)
    p.add_argument("--lo", type=rational, required=True)
    p.add_argument("--hi", type=rational, required=True)
    p.add_argument("--grid", type=pos_int, default=16)
    p.add_argument("--depth", type=nonneg_int, default=12)
    p.add_argument("--output", "-o")
    _add_cache_opts(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("plotdata", help="CSV of the zero brackets of f^(n)")
    _add_spec(p)
    p.add_argument("--n", type=nonneg_int, required=True)
    p.add_argument("--output", "-o")
    _add_cache_opts(p)
    p.set_defaults(func=cmd_plotdata)

    p = sub.add_parser("cache", help="inspect or clear the derivative cache")
    p.add_argument("action", choices=["info", "purge"])
    p.add_argument("--cache-dir")
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecParseError as exc:
        print(f"flatlab: parse error: {exc}", file=sys.stderr)
        return 1
    except ToleranceUnreachable as exc:
        print(f"flatlab: {exc}", file=sys.stderr)
        return 1
    except (FlatlabError, ValueError) as exc:
        print(f"flatlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
