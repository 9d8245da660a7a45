"""Exact Laurent polynomials in u with rational coefficients.

Root counting and isolation go through Sturm chains built on the cleared
integer polynomial ``lcm(denominators) * u**k * a(u)``; nothing here is ever
converted to floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Mapping, Sequence

from flatlab.errors import EvalAtPole

Rational = Fraction

DEFAULT_REL_WIDTH = Fraction(1, 2**40)

IntPoly = tuple[int, ...]  # ascending coefficients, no trailing zeros


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"a/b"`` / decimal strings to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a Fraction or a string")
    return Fraction(value)


class LaurentPoly:
    """Immutable finite sum of ``c * u**k`` with ``c`` rational and ``k`` any integer."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | Iterable[tuple[int, object]] = ()):
        if isinstance(terms, Mapping):
            items = terms.items()
        else:
            items = terms
        acc: dict[int, Fraction] = {}
        for k, c in items:
            k = int(k)
            acc[k] = acc.get(k, Fraction(0)) + as_rational(c)
        self._terms = tuple(sorted((k, c) for k, c in acc.items() if c != 0))
        self._hash = hash(self._terms)

    @classmethod
    def monomial(cls, coeff=1, exponent: int = 0) -> LaurentPoly:
        return cls({exponent: coeff})

    @classmethod
    def constant(cls, c) -> LaurentPoly:
        return cls({0: c})

    @classmethod
    def u(cls) -> LaurentPoly:
        return cls({1: 1})

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, shift: int = 0) -> LaurentPoly:
        """Build ``sum(coeffs[i] * u**(i + shift))``."""
        return cls((i + shift, c) for i, c in enumerate(coeffs))

    # -- structure --------------------------------------------------------

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self) -> tuple[tuple[int, Fraction], ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def min_exponent(self) -> int | None:
        return self._terms[0][0] if self._terms else None

    @property
    def max_exponent(self) -> int | None:
        return self._terms[-1][0] if self._terms else None

    @property
    def leading_coefficient(self) -> Fraction:
        return self._terms[-1][1] if self._terms else Fraction(0)

    def coefficient(self, k: int) -> Fraction:
        for e, c in self._terms:
            if e == k:
                return c
        return Fraction(0)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> LaurentPoly:
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction, str)):
            return LaurentPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return LaurentPoly(list(self._terms) + list(other._terms))

    __radd__ = __add__

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly((k, -c) for k, c in self._terms)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[int, Fraction] = {}
        for k1, c1 in self._terms:
            for k2, c2 in other._terms:
                acc[k1 + k2] = acc.get(k1 + k2, Fraction(0)) + c1 * c2
        return LaurentPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> LaurentPoly:
        if n < 0:
            if len(self._terms) != 1:
                raise ValueError("negative powers are only defined for monomials")
            (k, c), = self._terms
            return LaurentPoly.monomial(1 / c**-n, k * n)
        out = LaurentPoly.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, k: int) -> LaurentPoly:
        """Multiply by ``u**k``."""
        return LaurentPoly((e + k, c) for e, c in self._terms)

    def scale_variable(self, factor) -> LaurentPoly:
        """Return ``a(factor * u)``."""
        factor = as_rational(factor)
        if factor == 0:
            raise ValueError("scale factor must be nonzero")
        return LaurentPoly((k, c * factor**k) for k, c in self._terms)

    def d_du(self) -> LaurentPoly:
        return LaurentPoly((k - 1, k * c) for k, c in self._terms if k != 0)

    def __call__(self, x0) -> Fraction:
        x0 = as_rational(x0)
        if x0 == 0:
            if self._terms and self._terms[0][0] < 0:
                raise EvalAtPole("negative exponent evaluated at u = 0")
            return self.coefficient(0)
        return sum((c * x0**k for k, c in self._terms), Fraction(0))

    # -- identity ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == LaurentPoly.constant(other)
        return NotImplemented

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        return format_laurent(self)


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_laurent(a: LaurentPoly, var: str = "u") -> str:
    """Canonical text: descending exponents, ``c*u^k`` terms, e.g. ``u^4-2*u^3``."""
    if a.is_zero():
        return "0"
    parts = []
    for k, c in reversed(a.items()):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0:
            body = _format_coeff(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{_format_coeff(mag)}*{mono}"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += sign + body
    return out


# -- module-level operations ----------------------------------------------


def add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a + b


def mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a * b


def d_du(a: LaurentPoly) -> LaurentPoly:
    return a.d_du()


def sign_at(a: LaurentPoly, x0) -> int:
    """Exact sign of ``a(x0)``; raises EvalAtPole for a pole at 0."""
    v = a(x0)
    return (v > 0) - (v < 0)


# -- integer polynomial kernel --------------------------------------------


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _content(p: Sequence[int]) -> int:
    return reduce(math.gcd, p, 0)


def _primitive(p: Sequence[int]) -> IntPoly:
    """Divide out the content and make the leading coefficient positive."""
    p = _trim(list(p))
    if not p:
        return ()
    g = _content(p)
    if p[-1] < 0:
        g = -g
    return tuple(c // g for c in p)


def _from_fractions(p: Sequence[Fraction]) -> IntPoly:
    den = reduce(lambda x, y: x * y // math.gcd(x, y), (c.denominator for c in p), 1)
    return _primitive([int(c * den) for c in p])


def cleared(a: LaurentPoly) -> IntPoly:
    """Primitive integer polynomial with the same nonzero roots as ``a``.

    Negative exponents are cleared by multiplying with ``u**(-min_exponent)``;
    nonnegative exponents are kept as-is so a root at ``u = 0`` survives.
    """
    if a.is_zero():
        return ()
    shift = max(0, -a.min_exponent)
    coeffs = [Fraction(0)] * (a.max_exponent + shift + 1)
    for k, c in a.items():
        coeffs[k + shift] = c
    return _from_fractions(coeffs)


def _deriv(p: Sequence[int]) -> IntPoly:
    return tuple(i * c for i, c in enumerate(p))[1:]


def _prem(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Pseudo-remainder of a by b scaled by ``|lc(b)|**(deg a - deg b + 1)``."""
    r = list(a)
    db = len(b) - 1
    lc = b[-1]
    delta = len(a) - len(b) + 1
    if delta <= 0:
        return r
    for _ in range(delta):
        if len(r) - 1 < db:
            r = [lc * c for c in r]
            continue
        q = r[-1]
        shift = len(r) - 1 - db
        r = [lc * c for c in r]
        for i, c in enumerate(b):
            r[i + shift] -= q * c
        r.pop()
        _trim(r)
    if lc < 0 and delta % 2 == 1:
        r = [-c for c in r]
    return _trim(r)


def _int_gcd(a: IntPoly, b: IntPoly) -> IntPoly:
    """Primitive gcd over Z[u] by the primitive remainder sequence."""
    a, b = _primitive(a), _primitive(b)
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _prem(a, b)
        a, b = b, _primitive(r)
    return a


def _divexact(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a = [Fraction(c) for c in a]
    out = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lc = Fraction(b[-1])
    for shift in range(len(a) - len(b), -1, -1):
        q = a[shift + len(b) - 1] / lc
        out[shift] = q
        if q:
            for i, c in enumerate(b):
                a[i + shift] -= q * c
    if any(a[: len(b) - 1]):
        raise ArithmeticError("polynomial division is not exact")
    return out


def _monic_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    g = _int_gcd(_from_fractions(a), _from_fractions(b)) if any(b) else _from_fractions(a)
    return [Fraction(c, g[-1]) for c in g]


def _qderiv(p: Sequence[Fraction]) -> list[Fraction]:
    return [i * c for i, c in enumerate(p)][1:]


def _qsub(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _trim([Fraction(c) for c in out])


def _yun(p: IntPoly) -> list[tuple[IntPoly, int]]:
    """Yun's square-free factorization of a primitive integer polynomial."""
    if len(p) <= 1:
        return []
    f = [Fraction(c, p[-1]) for c in p]
    df = _qderiv(f)
    b = _monic_gcd(f, df)
    c = _divexact(f, b)
    d = _qsub(_divexact(df, b), _qderiv(c))
    factors = []
    i = 1
    while len(c) > 1:
        a = _monic_gcd(c, d) if d else list(c)
        c = _divexact(c, a)
        d = _qsub(_divexact(d, a), _qderiv(c)) if d else []
        if len(a) > 1:
            factors.append((_from_fractions(a), i))
        i += 1
    return factors


def _mul_int(a: Sequence[int], b: Sequence[int]) -> IntPoly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return tuple(out)


def square_free(a: LaurentPoly) -> tuple[LaurentPoly, dict[int, LaurentPoly]]:
    """Split ``a`` into its radical and a ``{multiplicity: factor}`` map.

    Both the radical and the factors are primitive integer polynomials with
    positive leading coefficient; the product of ``factor**m`` over the map
    equals the cleared form of ``a`` up to a rational constant.
    """
    if a.is_zero():
        raise ValueError("square_free of the zero polynomial")
    parts = _yun(cleared(a))
    radical: IntPoly = (1,)
    for fac, _ in parts:
        radical = _mul_int(radical, fac)
    mults = {m: LaurentPoly.from_coeffs(fac) for fac, m in parts}
    return LaurentPoly.from_coeffs(radical), mults


# -- Sturm machinery ------------------------------------------------------


def _sign_int_at(p: Sequence[int], q: Fraction) -> int:
    """Sign of p(q) via the homogenised Horner form (denominator > 0)."""
    if not p:
        return 0
    a, b = q.numerator, q.denominator
    acc = p[-1]
    bpow = 1
    for c in reversed(p[:-1]):
        bpow *= b
        acc = acc * a + c * bpow
    return (acc > 0) - (acc < 0)


@lru_cache(maxsize=512)
def sturm_chain(p: IntPoly) -> tuple[IntPoly, ...]:
    """Sturm sequence of a square-free integer polynomial (positive rescalings)."""
    p = _primitive(p)
    if len(p) <= 1:
        return (p,) if p else ()
    chain = [p, _primitive(_deriv(p))]
    while len(chain[-1]) > 1:
        r = _prem(chain[-2], chain[-1])
        if not r:
            break
        g = _content(r)
        chain.append(tuple(-c // g for c in r))
    return tuple(chain)


def _variations(chain: Sequence[IntPoly], q: Fraction) -> int:
    prev = 0
    count = 0
    for poly in chain:
        s = _sign_int_at(poly, q)
        if s:
            if prev and s != prev:
                count += 1
            prev = s
    return count


def _count_int(p: IntPoly, lo: Fraction, hi: Fraction) -> int:
    chain = sturm_chain(p)
    if not chain or len(chain[0]) <= 1:
        return 0
    return _variations(chain, lo) - _variations(chain, hi)


def sturm_count(a: LaurentPoly, lo, hi) -> int:
    """Number of distinct real roots of square-free ``a`` in ``(lo, hi]``.

    Query ranges must not contain ``u = 0`` when ``a`` has negative exponents.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    return _count_int(cleared(a), lo, hi)


def cauchy_bound(a: LaurentPoly) -> Fraction:
    """``1 + max|c_i| / |lead|`` of the cleared polynomial, rounded up to a power of 2."""
    p = cleared(a)
    if len(p) <= 1:
        return Fraction(1)
    bound = 1 + Fraction(max(abs(c) for c in p[:-1]), abs(p[-1]))
    return Fraction(2 ** math.ceil(math.log2(math.ceil(bound)))) if bound > 1 else Fraction(1)


# -- brackets -------------------------------------------------------------


@dataclass(frozen=True)
class RootBracket:
    """Isolating interval for one distinct root.

    In u-coordinates the root lies in ``(lo, hi]``; brackets produced by
    ``isolate_roots`` are tightened so that it lies strictly inside.
    ``coord == "x"`` brackets are the image under ``x = 1/u`` and hold the
    root in ``[lo, hi)``.
    """

    lo: Fraction
    hi: Fraction
    multiplicity: int
    sign_change: bool
    coord: str = "u"
    radical: IntPoly = field(default=(), compare=False, repr=False)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, q) -> bool:
        q = as_rational(q)
        if self.coord == "x":
            return self.lo <= q < self.hi
        return self.lo < q <= self.hi

    def to_x(self) -> RootBracket:
        if self.coord == "x":
            return self
        if self.lo <= 0:
            raise ValueError("x = 1/u needs a bracket in u > 0")
        return RootBracket(1 / self.hi, 1 / self.lo, self.multiplicity,
                           self.sign_change, "x", self.radical)

    def to_u(self) -> RootBracket:
        if self.coord == "u":
            return self
        return RootBracket(1 / self.hi, 1 / self.lo, self.multiplicity,
                           self.sign_change, "u", self.radical)

    def refine(self, max_width) -> RootBracket:
        """Shrink (by sign bisection on the radical) until width <= max_width."""
        max_width = as_rational(max_width)
        if self.width <= max_width:
            return self
        if not self.radical:
            raise ValueError("bracket carries no polynomial to refine against")
        if self.coord == "u":
            lo, hi = _bisect(self.radical, self.lo, self.hi,
                             lambda l, h: h - l <= max_width)
            return RootBracket(lo, hi, self.multiplicity, self.sign_change, "u", self.radical)
        ulo, uhi = 1 / self.hi, 1 / self.lo
        lo, hi = _bisect(self.radical, ulo, uhi, lambda l, h: 1 / l - 1 / h <= max_width)
        return RootBracket(1 / hi, 1 / lo, self.multiplicity, self.sign_change, "x", self.radical)


def _bisect(p: IntPoly, lo: Fraction, hi: Fraction, done) -> tuple[Fraction, Fraction]:
    """Refine a bracket ``(lo, hi]`` holding one simple root of ``p``."""
    s_hi = _sign_int_at(p, hi)
    while not done(lo, hi):
        mid = (lo + hi) / 2
        if s_hi == 0:
            lo = mid
            continue
        s_mid = _sign_int_at(p, mid)
        if s_mid == 0:
            lo, hi, s_hi = (lo + mid) / 2, mid, 0
        elif s_mid == s_hi:
            hi, s_hi = mid, s_mid
        else:
            lo = mid
    return lo, hi


def _open_up(p: IntPoly, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Move endpoints off roots of p while keeping exactly one root inside."""
    w = hi - lo
    if _sign_int_at(p, hi) == 0:
        step = w / 2
        while _sign_int_at(p, hi + step) == 0 or _count_int(p, hi, hi + step) != 0:
            step /= 2
        hi = hi + step
    if _sign_int_at(p, lo) == 0:
        step = w / 2
        while _sign_int_at(p, lo + step) == 0 or _count_int(p, lo, lo + step) != 0:
            step /= 2
        lo = lo + step
    return lo, hi


def _split_point(lo: Fraction, hi: Fraction) -> Fraction:
    if lo >= 1 and hi > 16 * lo:
        lb = lo.numerator.bit_length() - lo.denominator.bit_length()
        hb = hi.numerator.bit_length() - hi.denominator.bit_length()
        mid = Fraction(2) ** ((lb + hb) // 2)
        if lo < mid < hi:
            return mid
    return (lo + hi) / 2


def isolate_roots(a: LaurentPoly, lo, hi=None, *, rel_width=DEFAULT_REL_WIDTH,
                  abs_width=None) -> list[RootBracket]:
    """Disjoint sorted brackets for every distinct root of ``a`` in ``(lo, hi]``.

    ``hi=None`` queries the half-line via the Cauchy root bound. Brackets are
    refined until ``width <= rel_width * max(|lo|, |hi|)`` (or ``abs_width``).
    """
    lo = as_rational(lo)
    if a.is_zero():
        raise ValueError("isolate_roots of the zero polynomial")
    radical_lp, mults = square_free(a)
    p = cleared(radical_lp)
    if hi is None:
        hi = max(cauchy_bound(radical_lp), lo + 1)
    hi = as_rational(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    chain = sturm_chain(p)
    if len(p) <= 1:
        return []

    found: list[tuple[Fraction, Fraction]] = []
    stack = [(lo, hi, _variations(chain, lo), _variations(chain, hi))]
    while stack:
        l, h, vl, vh = stack.pop()
        n = vl - vh
        if n == 0:
            continue
        if n == 1:
            found.append((l, h))
            continue
        m = _split_point(l, h)
        vm = _variations(chain, m)
        stack.append((m, h, vm, vh))
        stack.append((l, m, vl, vm))
    found.sort()

    factor_polys = {m: cleared(f) for m, f in mults.items()}
    out = []
    for l, h in found:
        if abs_width is not None:
            cap = as_rational(abs_width)
            done = lambda L, H, cap=cap: H - L <= cap / 2
        else:
            rel = as_rational(rel_width)
            done = lambda L, H, rel=rel: H - L <= rel * max(abs(L), abs(H)) / 2
        l2, h2 = _bisect(p, l, h, done)
        l2, h2 = _open_up(p, l2, h2)
        if len(factor_polys) == 1:
            mult = next(iter(factor_polys))
        else:
            mult = next(m for m, fp in factor_polys.items() if _count_int(fp, l2, h2) == 1)
        out.append(RootBracket(l2, h2, mult, mult % 2 == 1, "u", p))
    return out
