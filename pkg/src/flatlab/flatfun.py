"""The exact flat family ``x -> exp(-p(1/x)) * L(1/x)``.

With ``u = 1/x`` and ``du/dx = -u**2`` one derivative acts only on the
Laurent part::

    L  ->  u**2 * (p'(u) * L(u) - L'(u))

so every derivative of a family member stays in the family with the same p.
The exponential never vanishes, hence the zeros of ``f^(n)`` in (0, 1) are
exactly the roots of ``L_n`` in ``u > 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from flint import arb

from flatlab.ball import Ball, to_arb, working_precision
from flatlab.cache import DerivativeCache
from flatlab.laurent import (DEFAULT_REL_WIDTH, LaurentPoly, RootBracket, as_rational,
                             format_laurent, isolate_roots, sign_at)

DEFAULT_PRECISION = 128

_default_cache = DerivativeCache()


def default_cache() -> DerivativeCache:
    return _default_cache


@dataclass(frozen=True)
class ExpPolyFlatFunction:
    p: LaurentPoly
    L: LaurentPoly

    def __post_init__(self):
        p = self.p
        if p.is_zero() or p.min_exponent < 0 or p.max_exponent < 1:
            raise ValueError(f"p must be a polynomial in u of degree >= 1, got {p}")
        if p.leading_coefficient <= 0:
            raise ValueError(f"p needs a positive leading coefficient, got {p}")
        if self.L.is_zero():
            raise ValueError("L must be nonzero")

    @classmethod
    def exp_neg_inv(cls) -> ExpPolyFlatFunction:
        """``e^{-1/x}``."""
        return cls(LaurentPoly.u(), LaurentPoly.constant(1))

    def with_L(self, L: LaurentPoly) -> ExpPolyFlatFunction:
        return ExpPolyFlatFunction(self.p, L)

    def spec(self) -> str:
        """Canonical spec text, e.g. ``exp(-(u))*(u^2-3)``."""
        head = f"exp(-({format_laurent(self.p)}))"
        if self.L == LaurentPoly.constant(1):
            return head
        return f"{head}*({format_laurent(self.L)})"

    def __str__(self) -> str:
        return self.spec()


@dataclass(frozen=True)
class ZeroSet:
    """Zeros of ``f^(n)`` in (0, 1), as ascending x-brackets."""

    n: int
    brackets: tuple[RootBracket, ...]

    @property
    def z(self) -> int:
        return len(self.brackets)


def differentiate(f: ExpPolyFlatFunction) -> ExpPolyFlatFunction:
    u2 = LaurentPoly.monomial(1, 2)
    return f.with_L(u2 * (f.p.d_du() * f.L - f.L.d_du()))


def derivative_sequence(f: ExpPolyFlatFunction, n_max: int,
                        cache: DerivativeCache | None = None) -> list[LaurentPoly]:
    """``[L_0, ..., L_n_max]``; resumes from and publishes to the cache."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    cache = cache if cache is not None else _default_cache
    key = f.spec()
    known = cache.load(key)
    seq: list[LaurentPoly] = []
    fresh: dict[int, LaurentPoly] = {}
    cur = f
    for n in range(n_max + 1):
        if n in known:
            cur = f.with_L(known[n])
        elif n == 0:
            fresh[0] = f.L
        else:
            cur = differentiate(cur)
            cache.recurrence_steps += 1
            fresh[n] = cur.L
        seq.append(cur.L)
    if fresh:
        cache.publish(key, fresh)
    return seq


def nth_derivative(f: ExpPolyFlatFunction, n: int,
                   cache: DerivativeCache | None = None) -> ExpPolyFlatFunction:
    if n < 0:
        raise ValueError("derivative order must be >= 0")
    return f.with_L(derivative_sequence(f, n, cache)[n])


def zeros_of_laurent(L: LaurentPoly, rel_width=DEFAULT_REL_WIDTH) -> tuple[RootBracket, ...]:
    """x-brackets for the roots of L in u in (1, oo), ascending in x."""
    brackets = isolate_roots(L, 1, None, rel_width=rel_width)
    return tuple(b.to_x() for b in reversed(brackets))


def zero_set(f: ExpPolyFlatFunction, n: int, cache: DerivativeCache | None = None,
             rel_width=DEFAULT_REL_WIDTH) -> ZeroSet:
    L = nth_derivative(f, n, cache).L
    return ZeroSet(n, zeros_of_laurent(L, rel_width))


def sign_at_one(f: ExpPolyFlatFunction, n: int, cache: DerivativeCache | None = None) -> int:
    return sign_at(nth_derivative(f, n, cache).L, 1)


def _exact_value_parts(f: ExpPolyFlatFunction, x0) -> tuple[Fraction, Fraction]:
    x0 = as_rational(x0)
    if x0 <= 0:
        raise ValueError("evaluation point must be > 0")
    u = 1 / x0
    return f.p(u), f.L(u)


def eval_ball(f: ExpPolyFlatFunction, x0, precision_bits: int = DEFAULT_PRECISION) -> Ball:
    """Enclosure of ``f(x0)``: p and L are exact, only the exponential is a ball."""
    pu, Lu = _exact_value_parts(f, x0)
    with working_precision(precision_bits):
        return Ball(to_arb(Lu) * (-to_arb(pu)).exp())


def _horner_arb(a: LaurentPoly, u: arb) -> arb:
    acc = arb(0)
    lo = a.min_exponent
    for k in range(a.max_exponent, lo - 1, -1):
        acc = acc * u + to_arb(a.coefficient(k))
    return acc * u**lo if lo >= 0 else acc / u**(-lo)


def eval_range_ball(f: ExpPolyFlatFunction, lo, hi,
                    precision_bits: int = DEFAULT_PRECISION) -> Ball:
    """Enclosure of ``f`` over the whole interval ``[lo, hi]`` (0 < lo)."""
    lo, hi = as_rational(lo), as_rational(hi)
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    with working_precision(precision_bits):
        x = to_arb(lo).union(to_arb(hi))
        u = 1 / x
        return Ball(_horner_arb(f.L, u) * (-_horner_arb(f.p, u)).exp())
