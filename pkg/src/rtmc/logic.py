"""Temporal formulas: shared AST for LTL and upper-bound metric operators.

Grammar (tightest first): unary ``~ [] <> [][<=n] <>[<=n]``, then ``U``/``W``
(right-assoc), ``/\\``, ``\\/``, ``->`` (right-assoc).  Atoms are ``true``,
``false``, identifiers (letters, digits, ``-``, ``.``) and ``clockLeq(n)``.
Bounded operators carry an implicit lower bound of 0 and must have a
strictly positive finite bound.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

from .config import Configuration, ModelError


class FormulaSyntaxError(ModelError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class UnknownPropositionError(ModelError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True, slots=True)
class TrueF:
    pass


@dataclass(frozen=True, slots=True)
class FalseF:
    pass


@dataclass(frozen=True, slots=True)
class Prop:
    name: str


@dataclass(frozen=True, slots=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Until:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class WeakUntil:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Always:
    arg: "Formula"


@dataclass(frozen=True, slots=True)
class Eventually:
    arg: "Formula"


@dataclass(frozen=True, slots=True)
class BoundedAlways:
    bound: int
    arg: "Formula"


@dataclass(frozen=True, slots=True)
class BoundedEventually:
    bound: int
    arg: "Formula"


Formula = Union[
    TrueF,
    FalseF,
    Prop,
    Not,
    And,
    Or,
    Implies,
    Until,
    WeakUntil,
    Always,
    Eventually,
    BoundedAlways,
    BoundedEventually,
]

BINARY = {And: "/\\", Or: "\\/", Implies: "->", Until: "U", WeakUntil: "W"}


def clock_leq(bound: int) -> Prop:
    return Prop(f"clockLeq({bound})")


def is_literal(f: Formula) -> bool:
    return isinstance(f, Prop) or (isinstance(f, Not) and isinstance(f.arg, Prop))


def negate_literal(f: Formula) -> Formula:
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def has_bounded(f: Formula) -> bool:
    if isinstance(f, (BoundedAlways, BoundedEventually)):
        return True
    if isinstance(f, (Not, Always, Eventually)):
        return has_bounded(f.arg)
    if isinstance(f, (And, Or, Implies, Until, WeakUntil)):
        return has_bounded(f.left) or has_bounded(f.right)
    return False


def propositions(f: Formula) -> set:
    if isinstance(f, Prop):
        return {f.name}
    if isinstance(f, (Not, Always, Eventually, BoundedAlways, BoundedEventually)):
        return propositions(f.arg)
    if isinstance(f, (And, Or, Implies, Until, WeakUntil)):
        return propositions(f.left) | propositions(f.right)
    return set()


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<box>\[\])
  | (?P<diamond><>)
  | (?P<lbound>\[<=)
  | (?P<rbracket>\])
  | (?P<and>/\\)
  | (?P<or>\\/)
  | (?P<implies>->)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<num>\d+)
  | (?P<tilde>~)
  | (?P<ident>[A-Za-z](?:[A-Za-z0-9.]|-(?!>))*)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind: str):
        t = self.next()
        if t[0] != kind:
            raise FormulaSyntaxError(f"expected {kind}, got {t[1]!r}", t[2])
        return t

    def parse(self) -> Formula:
        f = self.parse_implies()
        t = self.peek()
        if t[0] != "eof":
            raise FormulaSyntaxError(f"trailing input {t[1]!r}", t[2])
        return f

    def parse_implies(self) -> Formula:
        left = self.parse_or()
        if self.peek()[0] == "implies":
            self.next()
            return Implies(left, self.parse_implies())
        return left

    def parse_or(self) -> Formula:
        f = self.parse_and()
        while self.peek()[0] == "or":
            self.next()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self) -> Formula:
        f = self.parse_until()
        while self.peek()[0] == "and":
            self.next()
            f = And(f, self.parse_until())
        return f

    def parse_until(self) -> Formula:
        left = self.parse_unary()
        t = self.peek()
        if t[0] == "ident" and t[1] in ("U", "W"):
            self.next()
            right = self.parse_until()
            return Until(left, right) if t[1] == "U" else WeakUntil(left, right)
        return left

    def _parse_bound(self) -> int:
        # after '[<=': NUM ']'
        t = self.expect("num")
        bound = int(t[1])
        self.expect("rbracket")
        if bound <= 0:
            raise FormulaSyntaxError("bound must be > 0", t[2])
        return bound

    def parse_unary(self) -> Formula:
        t = self.peek()
        if t[0] == "tilde":
            self.next()
            return Not(self.parse_unary())
        if t[0] == "box":
            self.next()
            if self.peek()[0] == "lbound":
                self.next()
                bound = self._parse_bound()
                return BoundedAlways(bound, self.parse_unary())
            return Always(self.parse_unary())
        if t[0] == "diamond":
            self.next()
            if self.peek()[0] == "lbound":
                self.next()
                bound = self._parse_bound()
                return BoundedEventually(bound, self.parse_unary())
            return Eventually(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        t = self.next()
        if t[0] == "lpar":
            f = self.parse_implies()
            self.expect("rpar")
            return f
        if t[0] == "ident":
            name = t[1]
            if name == "true":
                return TrueF()
            if name == "false":
                return FalseF()
            if name in ("U", "W"):
                raise FormulaSyntaxError(f"{name} is an operator, not an atom", t[2])
            if name == "clockLeq":
                self.expect("lpar")
                n = self.expect("num")
                bound = int(n[1])
                self.expect("rpar")
                if bound <= 0:
                    raise FormulaSyntaxError("bound must be > 0", n[2])
                return clock_leq(bound)
            return Prop(name)
        raise FormulaSyntaxError(f"unexpected token {t[1]!r}", t[2])


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()


_PREC = {Implies: 1, Or: 2, And: 3, Until: 4, WeakUntil: 4}


def pretty(f: Formula, _prec: int = 0) -> str:
    """Print a formula in the concrete grammar; ``parse(pretty(f)) == f``."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Not):
        return "~" + pretty(f.arg, 5)
    if isinstance(f, Always):
        return "[] " + pretty(f.arg, 5)
    if isinstance(f, Eventually):
        return "<> " + pretty(f.arg, 5)
    if isinstance(f, BoundedAlways):
        return f"[][<={f.bound}] " + pretty(f.arg, 5)
    if isinstance(f, BoundedEventually):
        return f"<>[<={f.bound}] " + pretty(f.arg, 5)
    op = BINARY[type(f)]
    prec = _PREC[type(f)]
    # Right-assoc chains print without parens on the right; everything else
    # gets parenthesized when binding would change.
    lp = prec + 1 if type(f) in (Until, WeakUntil, Implies) else prec
    rp = prec if type(f) in (Until, WeakUntil, Implies) else prec + 1
    s = f"{pretty(f.left, lp)} {op} {pretty(f.right, rp)}"
    if prec < _prec:
        return "(" + s + ")"
    return s


# ---------------------------------------------------------------------------
# Propositions and labelings


@dataclass(frozen=True, slots=True)
class PropDef:
    name: str
    fn: Callable[[Configuration], bool]


class Labeling:
    """Named set of state propositions (the proposition alphabet)."""

    def __init__(self, props: Tuple[PropDef, ...] = ()):
        self.props = tuple(props)
        self.by_name = {}
        for p in self.props:
            if p.name in self.by_name:
                raise ModelError(f"duplicate proposition {p.name!r}")
            self.by_name[p.name] = p

    def names(self) -> tuple:
        return tuple(p.name for p in self.props)

    def has(self, name: str) -> bool:
        return name in self.by_name

    def extend(self, *props: PropDef) -> "Labeling":
        out = list(self.props)
        names = set(self.by_name)
        for p in props:
            if p.name not in names:
                names.add(p.name)
                out.append(p)
        return Labeling(tuple(out))

    def eval(self, name: str, cfg: Configuration) -> bool:
        p = self.by_name.get(name)
        if p is None:
            raise UnknownPropositionError(f"unknown proposition {name!r}")
        return bool(p.fn(cfg))

    def state_labels(self, cfg: Configuration) -> frozenset:
        return frozenset(p.name for p in self.props if p.fn(cfg))


def eval_prop(lab: Labeling, name: str, cfg: Configuration) -> bool:
    return lab.eval(name, cfg)


def eval_literal(lab: Labeling, lit: Formula, cfg: Configuration) -> bool:
    if isinstance(lit, Prop):
        return lab.eval(lit.name, cfg)
    if isinstance(lit, Not) and isinstance(lit.arg, Prop):
        return not lab.eval(lit.arg.name, cfg)
    raise ModelError(f"not a literal: {lit!r}")


# ---------------------------------------------------------------------------
# Metric-class recognition


@dataclass(frozen=True)
class Response:
    """[] ( \\/_i <>[<=b_i] q_i ) with literal obligations q_i."""

    pairs: Tuple[Tuple[Formula, int], ...]


@dataclass(frozen=True)
class Safety:
    """[] ( p \\/ [][<=b] q ) with literals p, q."""

    p: Formula
    q: Formula
    bound: int


@dataclass(frozen=True)
class PureLtl:
    pass


@dataclass(frozen=True)
class Unsupported:
    reason: str


MtlClass = Union[Response, Safety, PureLtl, Unsupported]


def _flatten_or(f: Formula) -> list:
    if isinstance(f, Or):
        return _flatten_or(f.left) + _flatten_or(f.right)
    return [f]


def _desugar(f: Formula) -> Formula:
    """Eliminate -> and false before classification."""
    if isinstance(f, Implies):
        return Or(Not(_desugar(f.left)), _desugar(f.right))
    if isinstance(f, FalseF):
        return Not(TrueF())
    if isinstance(f, Not):
        a = _desugar(f.arg)
        return a.arg if isinstance(a, Not) else Not(a)
    if isinstance(f, (And, Or, Until, WeakUntil)):
        return type(f)(_desugar(f.left), _desugar(f.right))
    if isinstance(f, (Always, Eventually)):
        return type(f)(_desugar(f.arg))
    if isinstance(f, (BoundedAlways, BoundedEventually)):
        return type(f)(f.bound, _desugar(f.arg))
    return f


def classify_mtl(f: Formula) -> MtlClass:
    """Recognize the two transformable metric classes.

    Response: [] of a disjunction of bounded-eventually literals.
    Safety:   [] of (literal \\/ bounded-always literal), in either order,
              including the ``p' -> [][<=b] q`` sugar.
    Anything without bounded operators is pure LTL; the rest is unsupported.
    """
    g = _desugar(f)
    if isinstance(g, Always):
        disjuncts = _flatten_or(g.arg)
        if all(isinstance(d, BoundedEventually) for d in disjuncts):
            if all(is_literal(d.arg) for d in disjuncts):
                return Response(tuple((d.arg, d.bound) for d in disjuncts))
            return Unsupported("bounded operator over non-literal")
        if len(disjuncts) == 2:
            for lit, box in (disjuncts, disjuncts[::-1]):
                if is_literal(lit) and isinstance(box, BoundedAlways):
                    if is_literal(box.arg):
                        return Safety(lit, box.arg, box.bound)
                    return Unsupported("bounded operator over non-literal")
    if not has_bounded(f):
        return PureLtl()
    return Unsupported("bounded operators in an untransformable position")
