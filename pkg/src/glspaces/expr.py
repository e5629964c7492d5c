"""One-variable arithmetic expressions: parser, printer, evaluator.

Grammar (EBNF)::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | base ("^" factor)?
    base   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"

Identifiers: the variables ``x`` and ``p`` (a single expression may use
only one of them) and the calls ``pow``, ``exp``, ``log``, ``abs``,
``sqrt``.  Numbers are decimals with optional fraction and exponent.
``^`` is right-associative and binds tighter than unary minus applied to
its left operand, so ``-x^2`` is ``-(x^2)`` while ``x^-2`` parses
directly.  There is no implicit multiplication: ``2x`` is a syntax error.

Evaluation is strict about the real domain: ``log`` of a non-positive
number, ``0^negative``, division by zero, non-integer powers of negative
numbers, and any non-finite result raise :class:`EvalDomainError` instead
of leaking NaN into callers.  ``0^0`` evaluates to ``1`` (limit convention
for the power families used throughout the package).

ASTs are immutable and hashable; evaluation is pure, so parsed
expressions are safe for unrestricted concurrent use.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownIdentifier

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Call",
    "parse", "evaluate", "to_source", "compile_expr", "free_variable",
]


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Var, Neg, BinOp, Call]

_FUNCTIONS = {"pow": 2, "exp": 1, "log": 1, "abs": 1, "sqrt": 1}
_VARIABLES = ("x", "p")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {source[pos]!r}", offset=pos,
                expected=("number", "identifier", "operator"))
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append((m.lastgroup, m.group(), m.start()))
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0
        self.seen_var = None

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, text):
        kind, val, off = self.peek()
        if kind == "op" and val == text:
            return self.advance()
        raise ExprSyntaxError(
            f"expected {text!r}, found {val or 'end of input'!r}",
            offset=off, expected=(text,))

    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.factor())
            else:
                return node

    def factor(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.factor())
        node = self.base()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return BinOp("^", node, self.factor())  # right-associative
        return node

    def base(self):
        kind, val, off = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "(":
                return self.call(val, off)
            if val in _VARIABLES:
                if self.seen_var is not None and self.seen_var != val:
                    raise ExprSyntaxError(
                        f"expression mixes variables {self.seen_var!r} and {val!r}; "
                        "only one free variable is allowed",
                        offset=off, expected=(self.seen_var,))
                self.seen_var = val
                return Var(val)
            raise UnknownIdentifier(val, offset=off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            f"expected a value, found {val or 'end of input'!r}",
            offset=off, expected=("number", "identifier", "("))

    def call(self, name, off):
        if name not in _FUNCTIONS:
            raise UnknownIdentifier(name, offset=off)
        self.expect_op("(")
        args = [self.expr()]
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == ",":
                self.advance()
                args.append(self.expr())
            else:
                break
        self.expect_op(")")
        arity = _FUNCTIONS[name]
        if len(args) != arity:
            raise ExprSyntaxError(
                f"{name} takes {arity} argument(s), got {len(args)}",
                offset=off, expected=(f"{arity} arguments",))
        return Call(name, tuple(args))


def parse(source: str) -> Expr:
    """Parse ``source`` into an AST or raise :class:`ExprSyntaxError`."""
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", offset=0, expected=("expression",))
    try:
        parser = _Parser(_tokenize(source))
        node = parser.expr()
        kind, val, off = parser.peek()
        if kind != "eof":
            raise ExprSyntaxError(
                f"unexpected trailing input {val!r}", offset=off,
                expected=("end of input",))
        return node
    except RecursionError:
        raise ExprSyntaxError("expression nested too deeply", offset=0) from None


def free_variable(e: Expr) -> str | None:
    """Name of the single free variable, or None for constants."""
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return free_variable(e.operand)
    if isinstance(e, BinOp):
        return free_variable(e.left) or free_variable(e.right)
    if isinstance(e, Call):
        for a in e.args:
            v = free_variable(a)
            if v:
                return v
    return None


def to_source(e: Expr) -> str:
    """Fully parenthesized source text; parse(to_source(e)) is structurally
    identical to ``e`` for parser-produced ASTs."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_source(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_source(a) for a in e.args)})"
    raise TypeError(f"not an Expr: {e!r}")


def _power(base, expo):
    return np.power(base, expo)


_CALL_IMPL = {
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "sqrt": np.sqrt,
}

_BINOP_IMPL = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.true_divide,
    "^": _power,
}


@lru_cache(maxsize=4096)
def compile_expr(e: Expr) -> Callable:
    """Compile an AST to a closure mapping a float or ndarray to the same.

    The closure performs no domain checking; callers decide how to treat
    non-finite outputs (see :func:`evaluate` for the strict scalar path).
    """
    if isinstance(e, Num):
        v = float(e.value)
        return lambda x: v
    if isinstance(e, Var):
        return lambda x: x
    if isinstance(e, Neg):
        g = compile_expr(e.operand)
        return lambda x: np.negative(g(x))
    if isinstance(e, BinOp):
        impl = _BINOP_IMPL[e.op]
        gl = compile_expr(e.left)
        gr = compile_expr(e.right)
        return lambda x: impl(gl(x), gr(x))
    if isinstance(e, Call):
        if e.name == "pow":
            gl = compile_expr(e.args[0])
            gr = compile_expr(e.args[1])
            return lambda x: _power(gl(x), gr(x))
        impl = _CALL_IMPL[e.name]
        g = compile_expr(e.args[0])
        return lambda x: impl(g(x))
    raise TypeError(f"not an Expr: {e!r}")


def evaluate(e: Expr, x: float) -> float:
    """Evaluate at a scalar point, raising :class:`EvalDomainError` on any
    domain violation or non-finite result."""
    fn = compile_expr(e)
    with np.errstate(all="ignore"):
        out = fn(float(x))
    r = float(out)
    if not math.isfinite(r):
        raise EvalDomainError(
            f"evaluation of {to_source(e)} at {x!r} left the real domain")
    return r
