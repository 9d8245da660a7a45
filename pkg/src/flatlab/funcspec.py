"""Parser for function specs ``exp(-(POLY))`` optionally followed by ``*(LAURENT)``.

POLY and LAURENT are sums of ``RATIONAL*u^INT`` terms in the variable
``u = 1/x``; either the coefficient or the ``u`` part of a term may be
omitted (``3``, ``u``, ``-u^2``, ``3/2*u^-1``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from flatlab.errors import SpecParseError
from flatlab.flatfun import ExpPolyFlatFunction
from flatlab.laurent import LaurentPoly

_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*"
    r"(?P<coef>\d+(?:/\d+)?)?\s*"
    r"(?P<star>\*)?\s*"
    r"(?P<var>u(?:\s*\^\s*(?:\(\s*(?P<pexp>[+-]?\d+)\s*\)|(?P<exp>[+-]?\d+)))?)?\s*"
)

_SPEC = re.compile(
    r"^\s*exp\s*\(\s*-\s*\((?P<p>(?:[^()]|\([^()]*\))*)\)\s*\)"
    r"\s*(?:\*\s*\((?P<L>(?:[^()]|\([^()]*\))*)\))?\s*$"
)


def parse_laurent(text: str) -> LaurentPoly:
    """Parse a sum of ``RATIONAL*u^INT`` terms."""
    src = text
    pos = 0
    terms: list[tuple[int, Fraction]] = []
    if not text.strip():
        raise SpecParseError("empty polynomial")
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise SpecParseError(f"cannot parse {src!r} at offset {pos}")
        coef, var = m.group("coef"), m.group("var")
        if coef is None and var is None:
            raise SpecParseError(f"dangling sign or '*' in {src!r} at offset {pos}")
        if m.group("star") and (coef is None or var is None):
            raise SpecParseError(f"misplaced '*' in {src!r}")
        if terms and m.group("sign") is None:
            raise SpecParseError(f"missing '+' or '-' between terms in {src!r}")
        c = Fraction(coef) if coef is not None else Fraction(1)
        if m.group("sign") == "-":
            c = -c
        if var is None:
            k = 0
        else:
            e = m.group("pexp") or m.group("exp")
            k = int(e) if e is not None else 1
        terms.append((k, c))
        pos = m.end()
    return LaurentPoly(terms)


def parse_spec(text: str) -> ExpPolyFlatFunction:
    m = _SPEC.match(text)
    if m is None:
        raise SpecParseError(
            f"expected exp(-(POLY)) or exp(-(POLY))*(LAURENT), got {text!r}")
    p = parse_laurent(m.group("p"))
    L = parse_laurent(m.group("L")) if m.group("L") is not None else LaurentPoly.constant(1)
    try:
        return ExpPolyFlatFunction(p, L)
    except ValueError as exc:
        raise SpecParseError(f"{text!r} is not a flat family member: {exc}") from exc


@dataclass(frozen=True)
class FunctionSpec:
    source: str
    function: ExpPolyFlatFunction

    @classmethod
    def parse(cls, text: str) -> FunctionSpec:
        return cls(text, parse_spec(text))

    @property
    def canonical(self) -> str:
        return self.function.spec()
