"""Per-order zero census of an exact family member and checks over it.

Rows carry x-brackets (see :class:`flatlab.laurent.RootBracket`); brackets
from different orders are compared by disjointness, refining both sides
when they overlap.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from flatlab.cache import DerivativeCache
from flatlab.errors import NotEnoughZeros, UnresolvedOrder
from flatlab.flatfun import ExpPolyFlatFunction, ZeroSet, derivative_sequence, zeros_of_laurent
from flatlab.laurent import DEFAULT_REL_WIDTH, LaurentPoly, RootBracket, sign_at
from flatlab.report import FAIL, PASS, Report, qstr

MAX_REFINE_WIDTH = Fraction(1, 2**200)

QUASI_POSITIVE = "+"
QUASI_NEGATIVE = "-"


@dataclass(frozen=True)
class QuasiIntervalPartition:
    """Quasi-positive/negative intervals of ``f^(n)`` on [0, 1], left to right.

    Breakpoints are the odd-multiplicity zeros; labels alternate.
    """

    breakpoints: tuple[RootBracket, ...]
    signs: tuple[str, ...]

    @property
    def s(self) -> int:
        return len(self.signs)


@dataclass(frozen=True)
class CensusRow:
    n: int
    zero_set: ZeroSet
    partition: QuasiIntervalPartition
    sign_at_one: int
    L: LaurentPoly = field(compare=False, repr=False)

    @property
    def z(self) -> int:
        return self.zero_set.z

    @property
    def s(self) -> int:
        return self.partition.s

    @property
    def min_zero(self) -> RootBracket | None:
        return self.zero_set.brackets[0] if self.zero_set.brackets else None

    @property
    def max_zero(self) -> RootBracket | None:
        return self.zero_set.brackets[-1] if self.zero_set.brackets else None


@dataclass(frozen=True)
class YTable:
    k: int
    N: int
    rows: dict[int, tuple[RootBracket, ...]]
    increasing_in_l: bool
    decreasing_in_n: bool
    decay: list[dict]

    @property
    def valid(self) -> bool:
        return self.increasing_in_l and self.decreasing_in_n


def partition_for(L: LaurentPoly, zeros: Sequence[RootBracket]) -> QuasiIntervalPartition:
    # x -> 0+ is u -> oo, where L has the sign of its leading coefficient
    sign = 1 if L.leading_coefficient > 0 else -1
    breakpoints = tuple(b for b in zeros if b.sign_change)
    labels = []
    for _ in range(len(breakpoints) + 1):
        labels.append(QUASI_POSITIVE if sign > 0 else QUASI_NEGATIVE)
        sign = -sign
    return QuasiIntervalPartition(breakpoints, tuple(labels))


def make_row(n: int, L: LaurentPoly, rel_width=DEFAULT_REL_WIDTH) -> CensusRow:
    zeros = zeros_of_laurent(L, rel_width)
    return CensusRow(n, ZeroSet(n, zeros), partition_for(L, zeros), sign_at(L, 1), L)


def iter_census(f: ExpPolyFlatFunction, n_max: int, cache: DerivativeCache | None = None,
                rel_width=DEFAULT_REL_WIDTH) -> Iterator[CensusRow]:
    """Rows for n = 0..n_max, yielded as soon as each is isolated."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    for n, L in enumerate(derivative_sequence(f, n_max, cache)):
        yield make_row(n, L, rel_width)


def census(f: ExpPolyFlatFunction, n_max: int, cache: DerivativeCache | None = None,
           rel_width=DEFAULT_REL_WIDTH) -> list[CensusRow]:
    return list(iter_census(f, n_max, cache, rel_width))


# -- ordering -------------------------------------------------------------


def order(a: RootBracket, b: RootBracket,
          max_refine=MAX_REFINE_WIDTH) -> tuple[int, RootBracket, RootBracket]:
    """-1 if root(a) < root(b), +1 if greater; also returns the refined brackets."""
    while True:
        if a.hi <= b.lo:
            return -1, a, b
        if b.hi <= a.lo:
            return 1, a, b
        if a.width <= max_refine and b.width <= max_refine:
            raise UnresolvedOrder(
                f"brackets [{float(a.lo)}, {float(a.hi)}) and [{float(b.lo)}, {float(b.hi)}) "
                "still overlap at maximum refinement")
        if a.width > max_refine:
            a = a.refine(a.width / 2)
        if b.width > max_refine:
            b = b.refine(b.width / 2)


def _bracket_json(b: RootBracket | None) -> dict | None:
    if b is None:
        return None
    return {"lo": qstr(b.lo), "hi": qstr(b.hi)}


# -- checks ---------------------------------------------------------------


def check_s_monotone(rows) -> Report:
    rows = sorted(rows, key=lambda r: r.n)
    for prev, cur in zip(rows, rows[1:]):
        if cur.s < prev.s:
            return Report("s_monotone", FAIL,
                          [{"n": prev.n, "s": prev.s, "next_n": cur.n, "next_s": cur.s}],
                          {"first_violation": cur.n})
    return Report("s_monotone", PASS, [], {"s": [r.s for r in rows]})


def check_z_monotone(rows) -> Report:
    rows = sorted(rows, key=lambda r: r.n)
    for prev, cur in zip(rows, rows[1:]):
        if cur.z < prev.z:
            return Report("z_monotone", FAIL,
                          [{"n": prev.n, "z": prev.z, "next_n": cur.n, "next_z": cur.z}],
                          {"first_violation": cur.n})
    return Report("z_monotone", PASS, [], {"z": [r.z for r in rows]})


def check_min_zero_decreasing(rows) -> Report:
    rows = [r for r in sorted(rows, key=lambda r: r.n) if r.z > 0]
    details = []
    status = PASS
    mins = [r.min_zero for r in rows]
    for i in range(len(mins) - 1):
        sgn, _, _ = order(mins[i + 1], mins[i])
        details.append({"n": rows[i + 1].n, "decreased": sgn < 0})
        if sgn >= 0 and status == PASS:
            status = FAIL
    summary = {"first_n": rows[0].n if rows else None,
               "last_n": rows[-1].n if rows else None}
    if rows:
        summary["min_zero_first"] = float(mins[0].midpoint)
        summary["min_zero_last"] = float(mins[-1].midpoint)
        summary["trend_ratio"] = float(mins[-1].midpoint / mins[0].midpoint)
    return Report("min_zero_decreasing", status, details, summary)


def _strictly_between(c: RootBracket, left: RootBracket | None, right: RootBracket) -> bool:
    if left is not None and order(left, c)[0] > 0:
        return False
    return order(c, right)[0] < 0


def check_interlacing(rows) -> Report:
    """Every gap of ``{0} U Z(n)`` holds a zero of the next order."""
    by_n = {r.n: r for r in rows}
    details = []
    status = PASS
    for n in sorted(by_n):
        if n + 1 not in by_n:
            continue
        pts = list(by_n[n].zero_set.brackets)
        nxt = list(by_n[n + 1].zero_set.brackets)
        lefts = [None] + pts[:-1]
        missing = []
        for i, (left, right) in enumerate(zip(lefts, pts)):
            if not any(_strictly_between(c, left, right) for c in nxt):
                missing.append(i)
        details.append({"n": n, "gaps": len(pts), "missing": missing})
        if missing:
            status = FAIL
    return Report("interlacing", status, details)


def y_table(rows, k: int) -> YTable:
    if k < 1:
        raise ValueError("k must be >= 1")
    rows = sorted(rows, key=lambda r: r.n)
    start = next((i for i, r in enumerate(rows) if r.z >= k), None)
    if start is None:
        raise NotEnoughZeros(f"no census row has {k} zeros (max z = "
                             f"{max((r.z for r in rows), default=0)})")
    N = rows[start].n
    table = {r.n: tuple(r.zero_set.brackets[:k]) for r in rows[start:]}
    if any(len(v) < k for v in table.values()):
        raise NotEnoughZeros(f"zero count drops below {k} after n = {N}")
    ns = sorted(table)
    inc_l = all(order(row[l], row[l + 1])[0] < 0
                for row in table.values() for l in range(k - 1))
    dec_n = all(order(table[b][l], table[a][l])[0] < 0
                for a, b in zip(ns, ns[1:]) for l in range(k))
    decay = []
    for l in range(k):
        first, last = table[ns[0]][l].midpoint, table[ns[-1]][l].midpoint
        decay.append({"l": l + 1, "first_n": ns[0], "first": float(first),
                      "last_n": ns[-1], "last": float(last), "ratio": float(last / first)})
    return YTable(k, N, table, inc_l, dec_n, decay)


def gap_report(rows) -> dict:
    """Largest gap of the union of zero sets up to each order (data only)."""
    rows = sorted(rows, key=lambda r: r.n)
    union: list[Fraction] = []
    out = []
    for r in rows:
        union.extend(b.midpoint for b in r.zero_set.brackets)
        entry = {"m": r.n, "n_points": 0, "min_zero": None, "max_gap": None, "gap": None}
        if r.min_zero is not None:
            floor = r.min_zero.midpoint
            pts = sorted(q for q in union if q >= floor) + [Fraction(1)]
            gaps = [(b - a, a, b) for a, b in zip(pts, pts[1:])]
            width, a, b = max(gaps)
            entry.update(n_points=len(pts) - 1, min_zero=float(floor),
                         max_gap=float(width), gap=[float(a), float(b)])
        out.append(entry)
    return {"report": "gap_report", "data_only": True, "rows": out}


# -- export ---------------------------------------------------------------


def row_to_json(row: CensusRow) -> dict:
    return {
        "n": row.n,
        "z": row.z,
        "s": row.s,
        "sign_at_one": row.sign_at_one,
        "min_zero": _bracket_json(row.min_zero),
        "max_zero": _bracket_json(row.max_zero),
        "roots": [{"lo": qstr(b.lo), "hi": qstr(b.hi), "mult": b.multiplicity}
                  for b in row.zero_set.brackets],
    }


CSV_COLUMNS = ["n", "z", "s", "min_zero_lo", "min_zero_hi", "max_zero_hi"]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.n, r.z, r.s,
                    qstr(r.min_zero.lo) if r.min_zero else "",
                    qstr(r.min_zero.hi) if r.min_zero else "",
                    qstr(r.max_zero.hi) if r.max_zero else ""])
    return buf.getvalue()
