"""ATL formula ASTs, concrete-syntax parser and printer, and unfolding helpers.

The AST keeps only the connectives the evaluation game has rules for:
propositions, negation, disjunction, the constants, and the three strategic
forms ``<<A>> X``, ``<<A>> (_ U _)`` and ``<<A>> (_ R _)``.  Surface ``&`` is
normalised away via De Morgan at parse time, and ``F``/``G`` desugar to
``true U _`` and ``false R _``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

AgentSet = tuple[int, ...]


class Formula:
    """Base class; all concrete node types are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class CoopX(Formula):
    coalition: AgentSet
    sub: Formula


@dataclass(frozen=True)
class CoopU(Formula):
    coalition: AgentSet
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class CoopR(Formula):
    coalition: AgentSet
    lhs: Formula
    rhs: Formula


TRUE = TrueF()
FALSE = FalseF()


def agent_set(agents) -> AgentSet:
    """Sorted duplicate-free coalition tuple."""
    out = tuple(sorted(set(int(a) for a in agents)))
    if any(a < 0 for a in out):
        raise ValueError("agent identifiers must be non-negative")
    return out


def not_(f: Formula) -> Formula:
    return Not(f)


def or_(l: Formula, r: Formula) -> Formula:
    return Or(l, r)


def and_(l: Formula, r: Formula) -> Formula:
    """Conjunction, normalised to ~(~l | ~r)."""
    return Not(Or(Not(l), Not(r)))


def coop_f(coalition: AgentSet, sub: Formula) -> Formula:
    """<<A>> F sub, i.e. <<A>> (true U sub)."""
    return CoopU(coalition, TRUE, sub)


def coop_g(coalition: AgentSet, sub: Formula) -> Formula:
    """<<A>> G sub, i.e. <<A>> (false R sub)."""
    return CoopR(coalition, FALSE, sub)


def _children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.sub,)
    if isinstance(f, Or):
        return (f.left, f.right)
    if isinstance(f, CoopX):
        return (f.sub,)
    if isinstance(f, (CoopU, CoopR)):
        return (f.lhs, f.rhs)
    return ()


def subformulas(f: Formula) -> list[Formula]:
    """Duplicate-free post-order list; every child precedes its parents."""
    seen: set[Formula] = set()
    out: list[Formula] = []

    def walk(g: Formula) -> None:
        if g in seen:
            return
        for child in _children(g):
            walk(child)
        if g not in seen:
            seen.add(g)
            out.append(g)

    walk(f)
    return out


def unfold_U(coalition: AgentSet, psi: Formula, theta: Formula, n: int) -> Formula:
    """n-step unfolding of <<A>> (psi U theta): theta | (psi & <<A>> X <prev>)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    cur = theta
    for _ in range(n):
        cur = or_(theta, and_(psi, CoopX(coalition, cur)))
    return cur


def unfold_G(coalition: AgentSet, theta: Formula, n: int) -> Formula:
    """n-step unfolding of <<A>> G theta: theta & <<A>> X <prev>."""
    if n < 0:
        raise ValueError("n must be non-negative")
    cur = theta
    for _ in range(n):
        cur = and_(theta, CoopX(coalition, cur))
    return cur


# --- concrete syntax -------------------------------------------------------

KEYWORDS = frozenset({"true", "false", "U", "R", "X", "F", "G"})

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<lshift><<)|(?P<rshift>>>)|(?P<lparen>\()|(?P<rparen>\))"
    r"|(?P<pipe>\|)|(?P<amp>&)|(?P<tilde>~)|(?P<comma>,)"
    r"|(?P<nat>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)


class FormulaSyntaxError(ValueError):
    """Syntax error carrying the byte offset and the expected-token set."""

    def __init__(self, offset: int, expected: frozenset[str], found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        want = ", ".join(sorted(expected))
        super().__init__(f"syntax error at offset {offset}: expected one of {{{want}}}, found {found}")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.lastgroup is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise FormulaSyntaxError(at, frozenset({"token"}), repr(text[at]))
        kind = m.lastgroup
        tok = m.group(kind)
        offset = m.start(kind)
        if kind == "ident" and tok in KEYWORDS:
            kind = tok
        tokens.append(_Token(kind, tok, offset))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


_UNARY_STARTERS = frozenset({"~", "true", "false", "identifier", "<<", "("})


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: frozenset[str]) -> FormulaSyntaxError:
        tok = self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return FormulaSyntaxError(tok.offset, expected, found)

    def expect(self, kind: str, label: str) -> _Token:
        if self.peek().kind != kind:
            raise self.fail(frozenset({label}))
        return self.advance()

    def parse_formula(self) -> Formula:
        f = self.parse_disj()
        if self.peek().kind != "end":
            raise self.fail(frozenset({"|", "&", "end of input"}))
        return f

    def parse_disj(self) -> Formula:
        f = self.parse_conj()
        while self.peek().kind == "pipe":
            self.advance()
            f = Or(f, self.parse_conj())
        return f

    def parse_conj(self) -> Formula:
        f = self.parse_unary()
        while self.peek().kind == "amp":
            self.advance()
            f = and_(f, self.parse_unary())
        return f

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "tilde":
            self.advance()
            return Not(self.parse_unary())
        if tok.kind == "true":
            self.advance()
            return TRUE
        if tok.kind == "false":
            self.advance()
            return FALSE
        if tok.kind == "ident":
            self.advance()
            return Prop(tok.text)
        if tok.kind == "lshift":
            return self.parse_coop()
        if tok.kind == "lparen":
            self.advance()
            f = self.parse_disj()
            self.expect("rparen", ")")
            return f
        raise self.fail(_UNARY_STARTERS)

    def parse_coop(self) -> Formula:
        self.expect("lshift", "<<")
        agents: list[int] = []
        if self.peek().kind == "nat":
            agents.append(int(self.advance().text))
            while self.peek().kind == "comma":
                self.advance()
                agents.append(int(self.expect("nat", "agent number").text))
        coalition = agent_set(agents)
        self.expect("rshift", ">>")
        tok = self.peek()
        if tok.kind == "X":
            self.advance()
            return CoopX(coalition, self.parse_unary())
        if tok.kind == "F":
            self.advance()
            return coop_f(coalition, self.parse_unary())
        if tok.kind == "G":
            self.advance()
            return coop_g(coalition, self.parse_unary())
        if tok.kind == "lparen":
            self.advance()
            lhs = self.parse_disj()
            op = self.peek()
            if op.kind not in ("U", "R"):
                raise self.fail(frozenset({"U", "R"}))
            self.advance()
            rhs = self.parse_disj()
            self.expect("rparen", ")")
            if op.kind == "U":
                return CoopU(coalition, lhs, rhs)
            return CoopR(coalition, lhs, rhs)
        raise self.fail(frozenset({"X", "F", "G", "("}))


def parse_formula(text: str) -> Formula:
    """Parse concrete syntax into an AST.

    ``~`` binds tightest, ``&`` tighter than ``|``, and infix ``U``/``R``
    require their own parentheses after the coalition.  Errors carry the
    byte offset and expected-token set.
    """
    return _Parser(text).parse_formula()


def _coalition_text(coalition: AgentSet) -> str:
    return "<<" + ",".join(str(a) for a in coalition) + ">>"


def _print_unary(f: Formula) -> str:
    # Arguments of ~ and X must be unary productions; anything else needs parens.
    if isinstance(f, Or):
        return "(" + print_formula(f) + ")"
    return print_formula(f)


def print_formula(f: Formula) -> str:
    """Canonical text such that parse(print(f)) structurally equals f.

    The canonical form never re-sugars: conjunctions stay in their
    De Morgan encoding and F/G stay as their U/R expansions.
    """
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Not):
        return "~" + _print_unary(f.sub)
    if isinstance(f, Or):
        left = print_formula(f.left)
        right = print_formula(f.right)
        if isinstance(f.right, Or):
            right = "(" + right + ")"
        return f"{left} | {right}"
    if isinstance(f, CoopX):
        return f"{_coalition_text(f.coalition)} X {_print_unary(f.sub)}"
    if isinstance(f, CoopU):
        return f"{_coalition_text(f.coalition)} ({print_formula(f.lhs)} U {print_formula(f.rhs)})"
    if isinstance(f, CoopR):
        return f"{_coalition_text(f.coalition)} ({print_formula(f.lhs)} R {print_formula(f.rhs)})"
    raise TypeError(f"not a formula: {f!r}")
