"""Expression language for branch definitions.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'

``FUNC`` is one of ``sin cos exp log``. The set of variable names is chosen by
the caller (``x`` for branch expressions, ``x`` and ``u`` for observables).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "exp", "log")
BINARY_OPS = ("+", "-", "*", "/", "^")


class Expr:
    """Base class of AST nodes."""

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Pi(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    name: str = "x"


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None:
            offset = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ParseError(f"unexpected character {source[offset]!r}", offset)
        kind = m.lastgroup
        text = m.group(kind)
        tokens.append((kind, text, m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source, variables):
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, offset = self.peek()
        if value != text or kind == "end":
            found = "end of input" if kind == "end" else repr(value)
            raise ParseError(f"expected {text!r}, found {found}", offset)
        self.i += 1

    def parse(self):
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {value!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, value, offset = self.take()
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            if value == "pi":
                return Pi()
            if value in self.variables:
                return Var(value)
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            raise UnknownIdentifier(value, offset)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ParseError(f"unexpected {found}", offset)


def parse_expression(source: str, variables=("x",)) -> Expr:
    """Parse ``source`` into an AST.

    Raises
    ------
    ParseError
        With the byte offset of the offending token.
    UnknownIdentifier
        For names that are neither variables, ``pi`` nor known functions.
    """
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    return _Parser(source, tuple(variables)).parse()


def to_source(e: Expr) -> str:
    """Fully parenthesised source text; re-parses to an identical AST."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def free_variables(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, BinOp):
        return free_variables(e.left) | free_variables(e.right)
    if isinstance(e, Call):
        return free_variables(e.arg)
    return set()


def _check(values, what):
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{what} produced a non-finite value")
    return values


def evaluate(e: Expr, env: dict):
    """Plain (value-only) evaluation; ``env`` maps variable names to arrays."""
    with np.errstate(all="ignore"):
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Pi):
            return math.pi
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, Neg):
            return -evaluate(e.operand, env)
        if isinstance(e, BinOp):
            a = evaluate(e.left, env)
            b = evaluate(e.right, env)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if e.op == "/":
                if np.any(np.asarray(b) == 0):
                    raise DomainError("division by zero")
                return a / b
            return _check(np.power(np.asarray(a, dtype=float), b), "power")
        if isinstance(e, Call):
            a = evaluate(e.arg, env)
            if e.func == "log":
                if np.any(np.asarray(a) <= 0):
                    raise DomainError("log of non-positive value")
                return np.log(a)
            if e.func == "exp":
                return _check(np.exp(a), "exp")
            return np.sin(a) if e.func == "sin" else np.cos(a)
    raise TypeError(f"not an expression node: {e!r}")


def constant_value(source) -> float:
    """Numeric value of a constant expression such as ``"1/3"`` or ``0.25``."""
    if isinstance(source, (int, float)):
        return float(source)
    e = parse_expression(str(source), variables=())
    return float(evaluate(e, {}))
