"""Validated numerics for ``g0(x) = exp(-1/x) * (sin(1/x) + 1)`` and its iterated integrals.

``g_n`` is computed through the single-integral form

    g_n(x) = int_0^x (x - t)^(n-1) / (n-1)! * g0(t) dt

with a Taylor-model panel rule: on ``[m - r, m + r]`` the integrand is
expanded at ``m`` to order K-1 and the order-K coefficient is enclosed over
the whole panel, which bounds the truncation error rigorously. The piece
``(0, delta]`` is covered by the analytic flat-tail bound
``2 * exp(-1/delta) * x^(n-1) / (n-1)! * delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from flint import acb, arb, arb_series

from flatlab.ball import Ball, _arb_to_fraction, to_arb, working_precision
from flatlab.errors import ToleranceUnreachable
from flatlab.flatfun import ExpPolyFlatFunction, eval_ball, eval_range_ball
from flatlab.laurent import as_rational

DEFAULT_BUDGET = 2**18
DEFAULT_ORDER = 16
DEFAULT_PRECISION = 128

Evaluator = Callable[[Fraction, int], Ball]
RangeEvaluator = Callable[[Fraction, Fraction, int], Ball]


@dataclass(frozen=True)
class NumericFunction:
    """A function on (0, 1] known only through ball evaluation.

    ``flat_tail_bound(delta)`` is a proven bound on ``|f|`` over (0, delta];
    ``range_evaluator`` (optional) encloses ``f`` over a whole interval.
    """

    name: str
    evaluator: Evaluator
    flat_tail_bound: Callable[[Fraction], Fraction] | None = None
    range_evaluator: RangeEvaluator | None = None

    def __call__(self, x0, precision_bits: int = DEFAULT_PRECISION) -> Ball:
        return self.evaluator(as_rational(x0), precision_bits)


@dataclass(frozen=True)
class QuadratureResult:
    value: Ball
    nodes_used: int
    tail_cut: Fraction
    method: str = "cauchy-kernel"

    def to_json(self) -> dict:
        return {"value": self.value.to_json(), "nodes_used": self.nodes_used,
                "tail_cut": f"{self.tail_cut.numerator}/{self.tail_cut.denominator}",
                "method": self.method}


def _upper(x: arb) -> Fraction:
    return _arb_to_fraction(x.upper())


def _check_point(x0) -> Fraction:
    x0 = as_rational(x0)
    if not 0 < x0 <= 1:
        raise ValueError(f"x0 must lie in (0, 1], got {x0}")
    return x0


# -- g0 ---------------------------------------------------------------------


def _g0_arb(x: arb) -> arb:
    u = 1 / x
    return (-u).exp() * (u.sin() + 1)


def g0(x0, precision_bits: int = DEFAULT_PRECISION) -> Ball:
    x0 = _check_point(x0)
    with working_precision(precision_bits):
        return Ball(_g0_arb(to_arb(x0)))


def g0_range(lo, hi, precision_bits: int = DEFAULT_PRECISION) -> Ball:
    lo, hi = as_rational(lo), as_rational(hi)
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    with working_precision(precision_bits):
        return Ball(_g0_arb(to_arb(lo).union(to_arb(hi))))


def g0_tail_bound(delta) -> Fraction:
    """``sup |g0|`` on (0, delta] is at most ``2 exp(-1/delta)``."""
    delta = as_rational(delta)
    with working_precision(64):
        return _upper(2 * (-1 / to_arb(delta)).exp())


G0 = NumericFunction("g0", lambda x, prec: g0(x, prec), g0_tail_bound,
                     lambda lo, hi, prec: g0_range(lo, hi, prec))


def g0_zeros_in(lo, hi, precision_bits: int = DEFAULT_PRECISION) -> list[tuple[Fraction, Fraction]]:
    """Enclosures of every zero ``2/((4k+3)pi)`` of g0 in ``(lo, hi)``, ascending."""
    lo, hi = as_rational(lo), as_rational(hi)
    if not 0 < lo < hi <= 1:
        raise ValueError("need 0 < lo < hi <= 1")
    k_lo = max(0, math.floor((2 / (float(hi) * math.pi) - 3) / 4) - 1)
    k_hi = math.ceil((2 / (float(lo) * math.pi) - 3) / 4) + 1
    out = []
    for k in range(k_lo, k_hi + 1):
        prec = precision_bits
        while True:
            with working_precision(prec):
                zk = 2 / ((4 * k + 3) * arb.pi())
                zlo, zhi = _arb_to_fraction(zk.lower()), _arb_to_fraction(zk.upper())
            if zhi <= lo or zlo >= hi:
                break
            if lo < zlo and zhi < hi:
                out.append((zlo, zhi))
                break
            prec *= 2  # endpoints are rational, the zero is not: this terminates
    return sorted(out)


# -- Cauchy-kernel quadrature -------------------------------------------------


def _kernel_series(t: arb, x0: arb, n: int, fact: arb) -> list[arb]:
    h = arb_series([t, 1])
    inv = 1 / h
    s = (-inv).exp() * (inv.sin() + 1)
    if n > 1:
        s = s * arb_series([x0 - t, -1]) ** (n - 1) / fact
    return s.coeffs()


def tail_bound(n: int, x0, delta) -> Fraction:
    """Upper bound for ``int_0^delta (x0-t)^(n-1)/(n-1)! g0(t) dt``."""
    x0, delta = as_rational(x0), as_rational(delta)
    with working_precision(64):
        b = 2 * (-1 / to_arb(delta)).exp() * to_arb(delta)
        b = b * to_arb(x0) ** (n - 1) / arb.fac_ui(n - 1)
        return _upper(b)


def choose_tail_cut(n: int, x0, tol) -> Fraction:
    """Largest dyadic ``delta`` whose tail bound is <= tol/4."""
    x0, tol = as_rational(x0), as_rational(tol)
    delta = Fraction(1)
    while tail_bound(n, x0, delta) > tol / 4:
        delta /= 2
    return delta


def _panel(a: Fraction, b: Fraction, x0: arb, n: int, fact: arb, K: int) -> arb:
    m = (a + b) / 2
    r = to_arb((b - a) / 2)
    point = _kernel_series(to_arb(m), x0, n, fact)
    whole = _kernel_series(to_arb(a).union(to_arb(b)), x0, n, fact)
    total = arb(0)
    rpow = r
    for j in range(K):
        if j % 2 == 0 and j < len(point):
            total += 2 * point[j] * rpow / (j + 1)
        rpow *= r
    # rpow is now r^(K+1)
    ck = whole[K] if len(whole) > K else arb(0)
    if not ck.is_finite():
        return arb.nan()
    err = ck.abs_upper() * 2 * rpow / (K + 1)
    return total + arb(0, err)


def gn(n: int, x0, tol, *, budget: int = DEFAULT_BUDGET, order: int = DEFAULT_ORDER,
       precision_bits: int | None = None) -> QuadratureResult:
    """Enclosure of ``g_n(x0)`` with radius <= tol."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x0 = _check_point(x0)
    tol = as_rational(tol)
    if tol <= 0:
        raise ValueError("tol must be > 0")
    delta = choose_tail_cut(n, x0, tol)
    if precision_bits is None:
        precision_bits = max(64, -math.floor(math.log2(tol)) + 40)
    K = order

    if x0 <= delta:
        T = tail_bound(n, x0, x0)
        with working_precision(precision_bits):
            return QuadratureResult(Ball(arb(0).union(to_arb(T))), 0, x0)

    span = x0 - delta
    allowance = 3 * tol / 4
    accepted: list[tuple[Fraction, arb]] = []
    nodes = 0
    with working_precision(precision_bits, series_length=K + 1):
        xa = to_arb(x0)
        fact = arb.fac_ui(n - 1)
        stack = [(delta, x0)]
        while stack:
            a, b = stack.pop()
            if nodes + 2 > budget:
                raise ToleranceUnreachable(
                    f"node budget {budget} exhausted for g_{n}({x0}) at tol {float(tol):.3g}")
            piece = _panel(a, b, xa, n, fact, K)
            nodes += 2
            share = allowance * (b - a) / span
            if piece.is_finite() and _arb_to_fraction(piece.rad()) <= share:
                accepted.append((a, piece))
            else:
                mid = (a + b) / 2
                stack.append((mid, b))
                stack.append((a, mid))
        accepted.sort(key=lambda item: item[0])
        total = arb(0)
        for _, piece in accepted:
            total += piece
        T = tail_bound(n, x0, delta)
        total += arb(0).union(to_arb(T))
        value = Ball(total)
    if value.radius > tol:
        raise ToleranceUnreachable(f"radius {float(value.radius):.3g} exceeds tol")
    return QuadratureResult(value, nodes, delta)


def gn_iterated(n: int, x0, *, panels: int = 2048, delta=Fraction(1, 64),
                precision_bits: int = DEFAULT_PRECISION) -> QuadratureResult:
    """Nested-integral enclosure of ``g_n(x0)``, independent of :func:`gn`.

    Level one integrates g0 panel by panel with Arb's rigorous integrator;
    every further level uses that each ``g_k`` is nondecreasing (g0 >= 0),
    so the integral over a panel lies between ``h * g_k(left)`` and
    ``h * g_k(right)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x0, delta = _check_point(x0), as_rational(delta)
    if x0 <= delta:
        delta = x0 / 2
    h = (x0 - delta) / panels
    grid = [delta + j * h for j in range(panels + 1)]
    with working_precision(precision_bits):
        ha = to_arb(h)
        edge = 2 * (-1 / to_arb(delta)).exp()

        def start(k: int) -> arb:
            top = edge * to_arb(delta) ** k / arb.fac_ui(k)
            return arb(0).union(top)

        def integrand(z, analytic):
            w = 1 / z
            return (-w).exp() * (w.sin() + 1)

        level = [start(1)]
        for a, b in zip(grid, grid[1:]):
            piece = acb.integral(integrand, acb(to_arb(a)), acb(to_arb(b)),
                                 rel_tol=2.0 ** -(precision_bits - 20)).real
            level.append(level[-1] + piece)
        for k in range(2, n + 1):
            nxt = [start(k)]
            for j in range(panels):
                lo = level[j].lower()
                hi = level[j + 1].upper()
                nxt.append(nxt[-1] + ha * arb(lo).union(arb(hi)))
            level = nxt
        value = Ball(level[-1])
    return QuadratureResult(value, panels, delta, method="iterated")


def gn_function(m: int, tol_bits: int | None = None) -> NumericFunction:
    """``g_m`` as a NumericFunction (``m = 0`` gives g0)."""
    if m == 0:
        return G0
    if m < 0:
        raise ValueError("order must be >= 0")

    def evaluator(x, prec):
        bits = tol_bits if tol_bits is not None else prec
        return gn(m, x, Fraction(1, 2**bits)).value

    def tail(delta):
        # g_m is nondecreasing and g0 <= 2 exp(-1/delta) on (0, delta]
        delta = as_rational(delta)
        with working_precision(64):
            return _upper(2 * (-1 / to_arb(delta)).exp() * to_arb(delta) ** m / arb.fac_ui(m))

    def range_eval(lo, hi, prec):
        left, right = evaluator(lo, prec), evaluator(hi, prec)
        with working_precision(prec):
            return Ball(arb(left.arb.lower()).union(arb(right.arb.upper())))

    return NumericFunction(f"g{m}", evaluator, tail, range_eval)


def derivative_shift(n: int, k: int) -> NumericFunction:
    """``g_n^(k) = g_(n-k)`` for ``0 <= k <= n``."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return gn_function(n - k)


def family_function(f: ExpPolyFlatFunction) -> NumericFunction:
    """An exact family member viewed as a NumericFunction."""
    return NumericFunction(
        f.spec(),
        lambda x, prec: eval_ball(f, x, prec),
        None,
        lambda lo, hi, prec: eval_range_ball(f, lo, hi, prec),
    )


# -- heuristic sign scan -------------------------------------------------------


@dataclass(frozen=True)
class ScanInterval:
    lo: Fraction
    hi: Fraction
    label: str  # "+", "-" or "?" (unresolved; never evidence of a zero)


@dataclass(frozen=True)
class SignScan:
    function: str
    intervals: tuple[ScanInterval, ...]
    heuristic: bool = field(default=True)

    @property
    def pattern(self) -> str:
        return "".join(i.label for i in self.intervals)

    def to_json(self) -> dict:
        return {"function": self.function, "heuristic": True,
                "intervals": [{"lo": f"{i.lo.numerator}/{i.lo.denominator}",
                               "hi": f"{i.hi.numerator}/{i.hi.denominator}",
                               "label": i.label} for i in self.intervals]}


def _cell_label(f: NumericFunction, lo: Fraction, hi: Fraction, prec: int) -> str:
    if f.range_evaluator is not None:
        s = f.range_evaluator(lo, hi, prec).sign()
        return {1: "+", -1: "-"}.get(s, "?")
    signs = {f.evaluator(x, prec).sign() for x in (lo, (lo + hi) / 2, hi)}
    if signs == {1}:
        return "+"
    if signs == {-1}:
        return "-"
    return "?"


def sign_scan(f: NumericFunction, lo, hi, initial_grid: int = 16, max_depth: int = 12,
              precision_bits: int = DEFAULT_PRECISION) -> SignScan:
    """Label subintervals of ``[lo, hi]`` by sign on a refining grid.

    Heuristic: without a range evaluator the labels come from point samples,
    and an unresolved cell only means the enclosure touched 0.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    if not 0 < lo < hi <= 1:
        raise ValueError("need 0 < lo < hi <= 1")
    if initial_grid < 1 or max_depth < 0:
        raise ValueError("initial_grid >= 1 and max_depth >= 0 required")
    step = (hi - lo) / initial_grid
    cells: list[ScanInterval] = []
    for i in range(initial_grid):
        stack = [(lo + i * step, lo + (i + 1) * step, 0)]
        while stack:
            a, b, depth = stack.pop()
            label = _cell_label(f, a, b, precision_bits)
            if label != "?" or depth >= max_depth:
                cells.append(ScanInterval(a, b, label))
            else:
                mid = (a + b) / 2
                stack.append((mid, b, depth + 1))
                stack.append((a, mid, depth + 1))
    merged: list[ScanInterval] = []
    for c in cells:
        if merged and merged[-1].label == c.label and merged[-1].hi == c.lo:
            merged[-1] = ScanInterval(merged[-1].lo, c.hi, c.label)
        else:
            merged.append(c)
    return SignScan(f.name, tuple(merged))
