"""Checkers for the positivity lemma, its numerator identity and the bound chain.

Normalisation by a transcendental constant never happens: a comparison such
as ``g(x)/g(1) < x^n`` is evaluated as ``s*L(u_x)*e^{-p(u_x)} < x^n * s*L(1)*e^{-p(1)}``
with ``s`` the exact sign of ``L(1)``, so each side holds one ball exponential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from flint import arb

from flatlab.ball import Ball, to_arb, working_precision
from flatlab.cache import DerivativeCache
from flatlab.errors import HypothesisViolated
from flatlab.flatfun import (ExpPolyFlatFunction, differentiate, nth_derivative,
                             zeros_of_laurent)
from flatlab.laurent import LaurentPoly, RootBracket, as_rational, sign_at
from flatlab.report import FAIL, HYPOTHESIS_VIOLATED, INCONCLUSIVE, PASS, Report, qstr

START_PRECISION = 64
PRECISION_CAP = 4096


def default_samples(n_uniform: int = 1024, n_geometric: int = 64) -> list[Fraction]:
    """``k/(n_uniform+1)`` for k = 1..n_uniform plus ``2^-k`` for k = 1..n_geometric."""
    pts = {Fraction(k, n_uniform + 1) for k in range(1, n_uniform + 1)}
    pts |= {Fraction(1, 2**k) for k in range(1, n_geometric + 1)}
    return sorted(pts)


@dataclass(frozen=True)
class WitnessReport:
    found: bool
    n_witness: int | None
    zero: RootBracket | None
    n_searched: int
    reason: str | None = None  # "zero" or "negative"

    def to_report(self) -> Report:
        details = []
        if self.found:
            details.append({
                "n": self.n_witness, "reason": self.reason,
                "zero": None if self.zero is None else {
                    "lo": qstr(self.zero.lo), "hi": qstr(self.zero.hi),
                    "mult": self.zero.multiplicity},
            })
        return Report("theorem1", PASS if self.found else INCONCLUSIVE, details,
                      {"found": self.found, "n_witness": self.n_witness,
                       "n_searched": self.n_searched})


def theorem1_witness(f: ExpPolyFlatFunction, n_max: int,
                     cache: DerivativeCache | None = None) -> WitnessReport:
    """Least n <= n_max where ``f^(n)`` vanishes or goes negative on (0, 1)."""
    cur = f
    for n in range(n_max + 1):
        if n:
            cur = nth_derivative(f, n, cache)
        zeros = zeros_of_laurent(cur.L)
        if zeros:
            return WitnessReport(True, n, zeros[0], n, "zero")
        # no root for u > 1, so the sign there is the sign at infinity
        if cur.L.leading_coefficient < 0:
            return WitnessReport(True, n, None, n, "negative")
    return WitnessReport(False, None, None, n_max)


def rescale_to_unit(f: ExpPolyFlatFunction, alpha) -> ExpPolyFlatFunction:
    """Family member for ``x -> f(alpha * x)``: u becomes ``u / alpha``."""
    alpha = as_rational(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if alpha == 1:
        return f
    return ExpPolyFlatFunction(f.p.scale_variable(1 / alpha), f.L.scale_variable(1 / alpha))


@dataclass(frozen=True)
class Lemma4Instance:
    """``g / g(1)`` on [0, 1] with g an exact family member.

    ``scale_sign`` is the sign of ``g(1)``; normalising by it keeps every
    comparison exact on the rational side.
    """

    g: ExpPolyFlatFunction
    n: int
    samples: tuple[Fraction, ...] = field(default_factory=lambda: tuple(default_samples()))

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        bad = [q for q in self.samples if not 0 < q < 1]
        if bad:
            raise ValueError(f"samples must lie in the open interval (0, 1): {bad[:3]}")
        if sign_at(self.g.L, 1) == 0:
            raise HypothesisViolated("g(1) = 0, cannot normalise")

    @classmethod
    def from_alpha(cls, f: ExpPolyFlatFunction, alpha, n: int,
                   samples: Sequence | None = None) -> Lemma4Instance:
        g = rescale_to_unit(f, alpha)
        if samples is None:
            return cls(g, n)
        return cls(g, n, tuple(as_rational(q) for q in samples))

    @property
    def scale_sign(self) -> int:
        return sign_at(self.g.L, 1)


def hypothesis_evidence(inst: Lemma4Instance) -> tuple[bool, dict]:
    """Exact check that the normalised ``g^(n+1)`` is positive on (0, 1]."""
    L_next = nth_derivative(inst.g, inst.n + 1).L
    s = inst.scale_sign
    zeros = zeros_of_laurent(L_next)
    sign_1, sign_2 = s * sign_at(L_next, 1), s * sign_at(L_next, 2)
    ok = not zeros and sign_1 > 0 and sign_2 > 0
    evidence = {
        "L_next": str(L_next),
        "roots_u_gt_1": [{"x_lo": qstr(b.lo), "x_hi": qstr(b.hi), "mult": b.multiplicity}
                         for b in zeros],
        "sign_at_u1": sign_1,
        "sign_at_u2": sign_2,
    }
    return ok, evidence


def _side(g: ExpPolyFlatFunction, x: Fraction, factor: Fraction, s: int) -> arb:
    u = 1 / x
    return to_arb(s * factor * g.L(u)) * (-to_arb(g.p(u))).exp()


def _compare(g, s, x_left, f_left, x_right, f_right, start, cap) -> tuple[str, int]:
    """Decide ``s*f_left*g(x_left) < s*f_right*g(x_right)`` with escalating precision."""
    prec = start
    while True:
        with working_precision(prec):
            lhs = Ball(_side(g, x_left, f_left, s))
            rhs = Ball(_side(g, x_right, f_right, s))
        if lhs.strictly_less(rhs):
            return PASS, prec
        if lhs.certainly_geq(rhs):
            return FAIL, prec
        if prec >= cap:
            return INCONCLUSIVE, prec
        prec = min(2 * prec, cap)


def _aggregate(check: str, outcomes: list[tuple[Fraction, str, int]], extra: dict) -> Report:
    statuses = {st for _, st, _ in outcomes}
    if FAIL in statuses:
        status = FAIL
    elif INCONCLUSIVE in statuses:
        status = INCONCLUSIVE
    else:
        status = PASS
    details = [{"x": qstr(x), "status": st, "precision": prec}
               for x, st, prec in outcomes if st != PASS]
    summary = {"samples": len(outcomes), "passed": sum(st == PASS for _, st, _ in outcomes),
               "max_precision": max((p for _, _, p in outcomes), default=0), **extra}
    return Report(check, status, details, summary)


def lemma4_check(inst: Lemma4Instance, precision: int = START_PRECISION,
                 precision_cap: int = PRECISION_CAP) -> Report:
    """Verify ``g(x)/g(1) < x^n`` at every sample after the exact hypothesis check."""
    ok, evidence = hypothesis_evidence(inst)
    if not ok:
        return Report("lemma4", HYPOTHESIS_VIOLATED, [evidence], {"n": inst.n})
    s = inst.scale_sign
    outcomes = []
    for x in inst.samples:
        st, prec = _compare(inst.g, s, x, Fraction(1), Fraction(1), x**inst.n,
                            precision, precision_cap)
        outcomes.append((x, st, prec))
    return _aggregate("lemma4", outcomes, {"n": inst.n, "hypothesis": evidence})


def ratio_chain_check(inst: Lemma4Instance, chain: Sequence | None = None,
                      precision: int = START_PRECISION,
                      precision_cap: int = PRECISION_CAP) -> Report:
    """``g(x)/x^n`` strictly increasing along a sorted chain (64 points by default)."""
    pts = sorted(as_rational(q) for q in chain) if chain is not None \
        else [Fraction(k, 65) for k in range(1, 65)]
    s = inst.scale_sign
    n = inst.n
    outcomes = []
    for a, b in zip(pts, pts[1:]):
        # g(a) * b^n < g(b) * a^n
        st, prec = _compare(inst.g, s, a, b**n, b, a**n, precision, precision_cap)
        outcomes.append((a, st, prec))
    return _aggregate("ratio_chain", outcomes, {"n": n, "chain_length": len(pts)})


def numerator_laurent(inst: Lemma4Instance) -> LaurentPoly:
    """Laurent part of ``x g'(x) - n g(x)``: ``u^-1 * L' - n * L`` (x = 1/u)."""
    L_plus = differentiate(inst.g).L
    return L_plus.shift(-1) - inst.n * inst.g.L


def numerator_check(inst: Lemma4Instance, samples: Sequence | None = None,
                    sign_fn: Callable[[LaurentPoly, Fraction], int] = sign_at) -> Report:
    """Exact sign of the numerator ``x g'(x) - n g(x)`` at each sample."""
    ok, evidence = hypothesis_evidence(inst)
    if not ok:
        return Report("numerator", HYPOTHESIS_VIOLATED, [evidence], {"n": inst.n})
    num = numerator_laurent(inst)
    s = inst.scale_sign
    pts = inst.samples if samples is None else tuple(as_rational(q) for q in samples)
    outcomes = []
    for x in pts:
        if not 0 < x < 1:
            raise ValueError("samples must lie in (0, 1)")
        positive = s * sign_fn(num, 1 / x) > 0
        outcomes.append((x, PASS if positive else FAIL, 0))
    return _aggregate("numerator", outcomes, {"n": inst.n, "numerator": str(num)})


def lemma7_probe(f: ExpPolyFlatFunction, N: int, p_max: int, x_sample,
                 precision: int = START_PRECISION, precision_cap: int = PRECISION_CAP,
                 cache: DerivativeCache | None = None) -> Report:
    """Least ``p <= p_max`` with ``F(x) > x^p``, F the derivative f^(N) scaled to F(1) = 1."""
    x = as_rational(x_sample)
    if not 0 < x < 1:
        raise ValueError("x_sample must lie in (0, 1)")
    fN = nth_derivative(f, N, cache)
    s = sign_at(fN.L, 1)
    summary = {"N": N, "p_max": p_max, "x": qstr(x), "least_p": None}
    if s == 0:
        return Report("lemma7", INCONCLUSIVE, [{"reason": "f^(N)(1) = 0, cannot normalise"}],
                      summary)
    details = []
    for p in range(p_max + 1):
        # violation: F(x) > x^p  <=>  x^p * s*L(1)e^{-p(1)} < s*L(u)e^{-p(u)}
        st, prec = _compare(fN, s, Fraction(1), x**p, x, Fraction(1), precision, precision_cap)
        details.append({"p": p, "violated": st == PASS, "precision": prec})
        if st == PASS:
            summary["least_p"] = p
            return Report("lemma7", PASS, details, summary)
        if st == INCONCLUSIVE:
            return Report("lemma7", INCONCLUSIVE, details, summary)
    with working_precision(precision):
        u = 1 / x
        ratio = to_arb(fN.L(u) / fN.L(1)) * (to_arb(fN.p(1)) - to_arb(fN.p(u))).exp()
        summary["margin_at_p_max"] = float((to_arb(x) ** p_max - ratio).mid()) \
            if p_max >= 0 else None
    return Report("lemma7", INCONCLUSIVE, details, summary)
