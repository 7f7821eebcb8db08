"""Cantor-normal-form ordinals with natural-number exponents.

Values are finite sums ``w^e1*c1 + ... + w^ek*ck`` with strictly decreasing
exponents and positive coefficients; the empty sum is 0.  This covers
everything the game machinery needs: natural numbers, omega-scale time
limits such as ``w*2+3``, comparison, and successor/predecessor steps.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class OrdinalError(ValueError):
    """Malformed ordinal text or an undefined ordinal operation."""


@dataclass(frozen=True, order=True)
class Ordinal:
    """An ordinal below w^w, as a tuple of (exponent, coefficient) terms.

    Term tuples with strictly decreasing exponents compare lexicographically
    exactly like the ordinals they denote, so the derived dataclass ordering
    is the genuine ordinal order.
    """

    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        prev = None
        for exp, coeff in self.terms:
            if exp < 0 or coeff < 1:
                raise OrdinalError(f"bad CNF term w^{exp}*{coeff}")
            if prev is not None and exp >= prev:
                raise OrdinalError("CNF exponents must be strictly decreasing")
            prev = exp

    @staticmethod
    def nat(n: int) -> "Ordinal":
        if n < 0:
            raise OrdinalError("ordinals are non-negative")
        return Ordinal(() if n == 0 else ((0, n),))

    @staticmethod
    def omega() -> "Ordinal":
        return Ordinal(((1, 1),))

    def is_zero(self) -> bool:
        return not self.terms

    def is_finite(self) -> bool:
        return not self.terms or self.terms[0][0] == 0

    def is_limit(self) -> bool:
        """Nonzero with no exponent-0 term."""
        return bool(self.terms) and self.terms[-1][0] != 0

    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0] == 0

    def to_int(self) -> int:
        if self.is_zero():
            return 0
        if not self.is_finite():
            raise OrdinalError(f"{self} is not a natural number")
        return self.terms[0][1]

    def predecessor(self) -> "Ordinal":
        """The unique b with b+1 = self; defined only for successors."""
        if self.is_zero():
            raise OrdinalError("0 has no predecessor")
        if self.is_limit():
            raise OrdinalError(f"limit ordinal {self} has no predecessor")
        exp, coeff = self.terms[-1]
        rest = self.terms[:-1]
        if coeff == 1:
            return Ordinal(rest)
        return Ordinal(rest + ((0, coeff - 1),))

    def plus(self, n: int) -> "Ordinal":
        """Ordinal sum self + n for a natural n."""
        if n < 0:
            raise OrdinalError("can only add naturals")
        if n == 0:
            return self
        if self.is_successor():
            exp, coeff = self.terms[-1]
            return Ordinal(self.terms[:-1] + ((0, coeff + n),))
        return Ordinal(self.terms + ((0, n),))

    def successor(self) -> "Ordinal":
        return self.plus(1)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, coeff in self.terms:
            if exp == 0:
                parts.append(str(coeff))
            else:
                base = "w" if exp == 1 else f"w^{exp}"
                parts.append(base if coeff == 1 else f"{base}*{coeff}")
        return "+".join(parts)

    def __repr__(self) -> str:
        return f"Ordinal({self})"


ZERO = Ordinal.nat(0)
OMEGA = Ordinal.omega()


def compare(a: Ordinal, b: Ordinal) -> str:
    """Total order on ordinals: 'less', 'equal' or 'greater'."""
    if a < b:
        return "less"
    if a == b:
        return "equal"
    return "greater"

_TERM_RE = re.compile(r"^(?:(?P<nat>\d+)|w(?:\^(?P<exp>\d+))?(?:\*(?P<coeff>\d+))?)$")


def parse_ordinal(text: str) -> Ordinal:
    """Parse ordinal text: NAT | "w" | "w^NAT", each optionally "*NAT", joined by "+".

    Exponents must strictly decrease, matching the normal form.
    """
    src = text.strip()
    if not src:
        raise OrdinalError("empty ordinal text")
    terms: list[tuple[int, int]] = []
    for part in src.split("+"):
        m = _TERM_RE.match(part.strip())
        if m is None:
            raise OrdinalError(f"bad ordinal term {part!r} in {text!r}")
        if m.group("nat") is not None:
            exp, coeff = 0, int(m.group("nat"))
        else:
            exp = int(m.group("exp")) if m.group("exp") else 1
            coeff = int(m.group("coeff")) if m.group("coeff") else 1
        if coeff == 0:
            if exp == 0 and len(src.split("+")) == 1:
                return ZERO
            raise OrdinalError(f"zero coefficient in {text!r}")
        terms.append((exp, coeff))
    try:
        return Ordinal(tuple(terms))
    except OrdinalError as exc:
        raise OrdinalError(f"{exc} in {text!r}") from None
