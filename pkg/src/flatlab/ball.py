"""Midpoint-radius enclosures backed by Arb (python-flint).

flint keeps its working precision in a process-global context, so every
evaluation that creates balls wraps itself in :func:`working_precision`.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from fractions import Fraction

from flint import arb, ctx, fmpq

_prec_lock = threading.RLock()


@contextmanager
def working_precision(bits: int, series_length: int | None = None):
    """Set flint's real precision (and optionally power-series length)."""
    bits = int(bits)
    if bits < 2:
        raise ValueError("precision must be at least 2 bits")
    with _prec_lock:
        saved = ctx.prec, ctx.cap
        ctx.prec = bits
        if series_length is not None:
            ctx.cap = int(series_length)
        try:
            yield
        finally:
            ctx.prec, ctx.cap = saved


def to_arb(q) -> arb:
    """Enclosure of an exact rational (exact when q is dyadic and fits)."""
    if isinstance(q, arb):
        return q
    q = Fraction(q)
    if q.denominator == 1:
        return arb(q.numerator)
    return arb(fmpq(q.numerator, q.denominator))


def _arb_to_fraction(x: arb) -> Fraction:
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)


class Ball:
    """A real number known to lie in ``[midpoint - radius, midpoint + radius]``.

    ``midpoint``/``radius``/``lower``/``upper`` are exact dyadic Fractions;
    avoid them for balls with astronomically large exponents and use the
    comparison methods, which stay inside Arb.
    """

    __slots__ = ("_v",)

    def __init__(self, value):
        if not isinstance(value, arb):
            value = to_arb(value)
        self._v = value

    @property
    def arb(self) -> arb:
        return self._v

    @property
    def midpoint(self) -> Fraction:
        return _arb_to_fraction(self._v.mid())

    @property
    def radius(self) -> Fraction:
        return _arb_to_fraction(self._v.rad())

    def lower(self) -> Fraction:
        return self.midpoint - self.radius

    def upper(self) -> Fraction:
        return self.midpoint + self.radius

    def is_finite(self) -> bool:
        return bool(self._v.is_finite())

    def contains(self, q) -> bool:
        if isinstance(q, Ball):
            return bool(self._v.contains(q._v))
        q = Fraction(q)
        return self.lower() <= q <= self.upper()

    def is_positive(self) -> bool:
        return bool(self._v > 0)

    def is_negative(self) -> bool:
        return bool(self._v < 0)

    def sign(self) -> int | None:
        """+1/-1 when certain, None when the ball straddles or touches 0."""
        if self.is_positive():
            return 1
        if self.is_negative():
            return -1
        return None

    def overlaps(self, other: Ball) -> bool:
        return bool(self._v.overlaps(other._v))

    # arb comparisons are certified: True only when every point satisfies them
    def strictly_less(self, other) -> bool:
        other = other if isinstance(other, Ball) else Ball(other)
        return bool(self._v < other._v)

    def certainly_geq(self, other) -> bool:
        other = other if isinstance(other, Ball) else Ball(other)
        return bool(self._v >= other._v)

    def __float__(self) -> float:
        return float(self._v.mid())

    def __repr__(self) -> str:
        return f"Ball({self._v.str(radius=True)})"

    def __str__(self) -> str:
        return f"{float(self._v.mid()):.12g} +/- {float(self._v.rad()):.3g}"

    def to_json(self) -> dict:
        mid, rad = self.midpoint, self.radius
        return {"mid": f"{mid.numerator}/{mid.denominator}",
                "rad": f"{rad.numerator}/{rad.denominator}",
                "approx": float(self._v.mid())}
