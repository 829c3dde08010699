"""Text syntax for scalars, torus elements and chord elements.

Grammar (whitespace-insensitive)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ['^' exponent]
    exponent := ['-'] INT | ['-'] '(' ['-'] INT ['/' INT] ')'
    atom   := NUMBER | NAME | '(' expr ')' | 'O' '(' 'a' ['^' INT] ')'

Names: scalar variables ``q Q x gamma`` (also ``γ``), torus generators
``l m`` (one component), ``l1 m1 l2 m2 ...`` (several), ``M L`` (recurrence
operators, M in the first slot), chord generators ``a12 a21 d12 d21``,
plus any names bound in the environment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from qtorus.chord import CHORDS, DUALS, ChordElement
from qtorus.scalars import ONE, Scalar, ScalarError, as_scalar
from qtorus.torus import TorusElement, TorusError, default_names

SCALAR_VARS = {"q": "q", "Q": "Q", "x": "x", "gamma": "gamma", "γ": "gamma"}
OPERATOR_NAMES = ("M", "L")


class ParseError(ValueError):
    def __init__(self, message: str, column: int, text: str = ""):
        super().__init__(f"syntax error at column {column}: {message}")
        self.column = column
        self.text = text


# --- lexer ------------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-zγ_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    col: int  # 1-based


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos + 1, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append(Token(kind, m.group(kind), start + 1))
        pos = m.end()
    out.append(Token("end", "", n + 1))
    return out


# --- AST ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Name:
    name: str
    col: int


@dataclass(frozen=True)
class BigO:
    order: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    col: int


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: Fraction
    col: int


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str) -> Token:
        t = self.take()
        if t.value != value:
            got = "end of input" if t.kind == "end" else repr(t.value)
            raise ParseError(f"expected {value!r}, got {got}", t.col, self.text)
        return t

    def parse(self):
        if self.peek().kind == "end":
            raise ParseError("empty expression", 1, self.text)
        node = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.value!r}", t.col, self.text)
        return node

    def expr(self):
        t = self.peek()
        if t.value in ("+", "-"):
            self.take()
            node = self.term()
            if t.value == "-":
                node = Neg(node)
        else:
            node = self.term()
        while self.peek().value in ("+", "-"):
            op = self.take()
            node = BinOp(op.value, node, self.term(), op.col)
        return node

    def term(self):
        node = self.factor()
        while self.peek().value in ("*", "/"):
            op = self.take()
            t = self.peek()
            if t.value in ("+", "-"):
                # allow a signed factor after '*': q * -1
                self.take()
                rhs = self.factor()
                if t.value == "-":
                    rhs = Neg(rhs)
            else:
                rhs = self.factor()
            node = BinOp(op.value, node, rhs, op.col)
        return node

    def factor(self):
        node = self.atom()
        if self.peek().value == "^":
            caret = self.take()
            node = Pow(node, self.exponent(caret), caret.col)
        if self.peek().value == "^":
            raise ParseError("chained exponent; use parentheses", self.peek().col, self.text)
        return node

    def exponent(self, caret: Token) -> Fraction:
        sign = 1
        if self.peek().value == "-":
            self.take()
            sign = -1
        t = self.peek()
        if t.kind == "num":
            self.take()
            return sign * Fraction(int(t.value))
        if t.value == "(":
            self.take()
            if self.peek().value == "-":
                self.take()
                sign = -sign
            n = self.take()
            if n.kind != "num":
                raise ParseError("malformed exponent after '^'", caret.col, self.text)
            val = Fraction(int(n.value))
            if self.peek().value == "/":
                self.take()
                d = self.take()
                if d.kind != "num" or int(d.value) == 0:
                    raise ParseError("malformed exponent after '^'", caret.col, self.text)
                val = Fraction(int(n.value), int(d.value))
            self.expect(")")
            return sign * val
        raise ParseError("malformed exponent after '^'", caret.col, self.text)

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return Num(int(t.value))
        if t.kind == "name":
            if t.value == "O" and self.peek().value == "(":
                return self.big_o(t)
            return Name(t.value, t.col)
        if t.value == "(":
            node = self.expr()
            self.expect(")")
            return node
        got = "end of input" if t.kind == "end" else repr(t.value)
        raise ParseError(f"unexpected {got}", t.col, self.text)

    def big_o(self, start: Token) -> BigO:
        self.expect("(")
        a = self.take()
        if a.value != "a":
            raise ParseError("expected 'a' inside O(...)", a.col, self.text)
        order = 1
        if self.peek().value == "^":
            self.take()
            n = self.take()
            if n.kind != "num":
                raise ParseError("expected an integer order", n.col, self.text)
            order = int(n.value)
        self.expect(")")
        return BigO(order)


def parse_ast(text: str):
    return _Parser(text).parse()


# --- evaluation ---------------------------------------------------------------------------


def _names_in(node, acc: set) -> set:
    if isinstance(node, Name):
        acc.add(node.name)
    elif isinstance(node, BinOp):
        _names_in(node.left, acc)
        _names_in(node.right, acc)
    elif isinstance(node, (Neg,)):
        _names_in(node.arg, acc)
    elif isinstance(node, Pow):
        _names_in(node.base, acc)
    return acc


_GEN = re.compile(r"^([lm])(\d+)$")


def infer_layout(names: set, env: Mapping[str, object] | None = None) -> tuple[int, tuple[str, ...]]:
    """Component count and generator names implied by the identifiers used."""
    env = env or {}
    kinds = set()
    ncomp = 0
    for n in names:
        if n in env:
            v = env[n]
            if isinstance(v, (TorusElement, ChordElement)):
                kinds.add(("env", v.ncomp, v.names))
            continue
        if n in ("l", "m"):
            kinds.add("single")
        elif n in OPERATOR_NAMES:
            kinds.add("op")
        else:
            m = _GEN.match(n)
            if m:
                kinds.add("multi")
                ncomp = max(ncomp, int(m.group(2)))
    plain = {k for k in kinds if isinstance(k, str)}
    envk = {k for k in kinds if not isinstance(k, str)}
    if len(plain) > 1:
        raise ValueError("cannot mix generator families " + ", ".join(sorted(plain)))
    layout = None
    if plain == {"single"}:
        layout = (1, ("l", "m"))
    elif plain == {"op"}:
        layout = (1, OPERATOR_NAMES)
    elif plain == {"multi"}:
        layout = (ncomp, numbered_names(ncomp))
    for _, nc, nm in envk:
        if layout is None:
            layout = (nc, nm)
        elif layout[0] != nc:
            if plain == {"multi"} and nc >= layout[0]:
                layout = (nc, nm)
            else:
                raise ValueError("component-count mismatch between bound names and generators")
    return layout or (1, ("l", "m"))


def numbered_names(ncomp: int) -> tuple[str, ...]:
    return tuple(f"{g}{i}" for i in range(1, ncomp + 1) for g in "lm")


class Evaluator:
    """Evaluate an AST into Scalar / TorusElement / ChordElement values."""

    def __init__(self, ncomp: int, names: tuple[str, ...], env: Mapping[str, object] | None = None, text: str = ""):
        self.ncomp = ncomp
        self.names = names
        self.env = dict(env or {})
        self.text = text

    def fail(self, msg: str, col: int = 1):
        raise ParseError(msg, col, self.text)

    def name(self, node: Name):
        n = node.name
        if n in self.env:
            return self.env[n]
        if n in SCALAR_VARS:
            return Scalar.var(SCALAR_VARS[n])
        if n in self.names:
            return TorusElement.generator(self.names.index(n), self.ncomp, names=self.names)
        if n in CHORDS or n in DUALS:
            return ChordElement.generator(n, self.ncomp, self.names)
        self.fail(f"unknown name {n!r}", node.col)

    def eval(self, node):
        if isinstance(node, Num):
            return as_scalar(node.value)
        if isinstance(node, Name):
            return self.name(node)
        if isinstance(node, BigO):
            return ChordElement.truncation(node.order, self.ncomp, self.names)
        if isinstance(node, Neg):
            return -self.eval(node.arg)
        if isinstance(node, Pow):
            return self.power(self.eval(node.base), node.exp, node.col)
        if isinstance(node, BinOp):
            a = self.eval(node.left)
            b = self.eval(node.right)
            try:
                return self.binop(node.op, a, b, node.col)
            except (TorusError, ScalarError) as exc:
                self.fail(str(exc), node.col)
        raise TypeError(node)

    def _promote(self, v):
        if isinstance(v, Scalar):
            return TorusElement.scalar(v, self.ncomp, self.names)
        return v

    def binop(self, op: str, a, b, col: int):
        if op == "/":
            if isinstance(b, Scalar):
                if b.is_zero():
                    self.fail("division by zero", col)
                return a / b if isinstance(a, Scalar) else a * b.inverse()
            if isinstance(b, TorusElement) and len(b.terms) == 1:
                return self.binop("*", a, b.monomial_power(Fraction(-1)), col)
            self.fail("division by a non-scalar", col)
        if isinstance(a, Scalar) and isinstance(b, Scalar):
            return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__}[op](b)
        if isinstance(a, ChordElement) or isinstance(b, ChordElement):
            a = a if isinstance(a, ChordElement) else ChordElement.from_torus(self._promote(a))
            b = b if isinstance(b, ChordElement) else ChordElement.from_torus(self._promote(b))
        else:
            a, b = self._promote(a), self._promote(b)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        return a * b

    def power(self, base, e: Fraction, col: int):
        try:
            if isinstance(base, Scalar):
                return base ** e
            if isinstance(base, TorusElement):
                if len(base.terms) == 1:
                    return base.monomial_power(e)
                if e.denominator == 1 and e >= 0:
                    return base ** int(e)
                self.fail("only monomials take negative or fractional powers", col)
            if isinstance(base, ChordElement):
                if e.denominator == 1 and e >= 0:
                    return base ** int(e)
                self.fail("chord elements take only non-negative integer powers", col)
        except (ScalarError, TorusError) as exc:
            self.fail(str(exc), col)
        raise TypeError(base)


def parse(text: str, env: Mapping[str, object] | None = None, ncomp: int | None = None, names=None):
    """Parse ``text`` into a Scalar, TorusElement or ChordElement."""
    ast = parse_ast(text)
    if names is not None:
        names = tuple(names)
        ncomp = len(names) // 2
    elif ncomp is None:
        try:
            ncomp, names = infer_layout(_names_in(ast, set()), env)
        except ValueError as exc:
            raise ParseError(str(exc), 1, text) from None
    else:
        names = default_names(ncomp)
    return Evaluator(ncomp, names, env, text).eval(ast)


def parse_scalar(text: str) -> Scalar:
    v = parse(text)
    if not isinstance(v, Scalar):
        raise ParseError("expected a scalar expression", 1, text)
    return v


def parse_torus(text: str, ncomp: int | None = None, names=None, env=None) -> TorusElement:
    v = parse(text, env=env, ncomp=ncomp, names=names)
    if isinstance(v, Scalar):
        nc, nm = (len(names) // 2, tuple(names)) if names else ((ncomp or 1), None)
        return TorusElement.scalar(v, nc, nm)
    if isinstance(v, ChordElement):
        if v.is_torus() and v.trunc is None:
            return v.torus_part()
        raise ParseError("expected a torus expression", 1, text)
    return v


def parse_chord(text: str, ncomp: int | None = None, names=None, env=None) -> ChordElement:
    v = parse(text, env=env, ncomp=ncomp, names=names)
    if isinstance(v, Scalar):
        nc = len(names) // 2 if names else (ncomp or 1)
        return ChordElement.from_torus(TorusElement.scalar(v, nc, names))
    if isinstance(v, TorusElement):
        return ChordElement.from_torus(v)
    return v


def to_text(v) -> str:
    return str(v)


# --- commutative evaluation (sympy) -----------------------------------------------------------


def parse_commutative(text: str, env: Mapping[str, object] | None = None):
    """Parse into a commutative sympy expression (q, chords and generators all commute)."""
    import sympy

    env = dict(env or {})
    ast = parse_ast(text)

    def ev(node):
        if isinstance(node, Num):
            return sympy.Integer(node.value)
        if isinstance(node, Name):
            if node.name in env:
                return env[node.name]
            if node.name in DUALS:
                raise ParseError("dual operators are not commutative variables", node.col, text)
            return sympy.Symbol(SCALAR_VARS.get(node.name, node.name))
        if isinstance(node, BigO):
            raise ParseError("truncation markers are not allowed here", 1, text)
        if isinstance(node, Neg):
            return -ev(node.arg)
        if isinstance(node, Pow):
            return ev(node.base) ** sympy.Rational(node.exp.numerator, node.exp.denominator)
        a, b = ev(node.left), ev(node.right)
        return {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b, "/": lambda: a / b}[node.op]()

    return sympy.expand(ev(ast))


__all__ = [
    "ParseError",
    "infer_layout",
    "parse",
    "parse_ast",
    "parse_chord",
    "parse_commutative",
    "parse_scalar",
    "parse_torus",
    "tokenize",
    "to_text",
]
