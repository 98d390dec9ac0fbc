"""Tiny expression language for kernel factors.

Kernel factors u and v are written as closed-form expressions in the single
time variable ``t``, e.g. ``"exp(2*t) - 1"`` or ``"t*(1 - t)"``. The grammar:

    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          right-associative
    atom   := NUMBER | 't' | NAME '(' expr ')' | '(' expr ')'

Binding strength is ``^`` above unary minus above ``*``/``/`` above
``+``/``-``, so ``-t^2`` means ``-(t^2)``. Known functions: exp, sin, cos,
sqrt, log. Numbers are ordinary decimal literals with an optional exponent
part.

Pretty-printing emits minimal parentheses and round-trips: parsing the
printed form reproduces the original tree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifier

FUNCTIONS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "log": np.log,
}

VARIABLE = "t"


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


# ---------------------------------------------------------------------------
# lexer


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "end"
    text: str
    offset: int


def _lex(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/^()":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ExpressionSyntaxError(source, i, "a numeric literal") from None
            tokens.append(_Token("num", text, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("name", source[i:j], i))
            i = j
            continue
        raise ExpressionSyntaxError(source, i, "a number, name, or operator")
    tokens.append(_Token("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _lex(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: str) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(self.source, self.peek().offset, expected)

    def parse(self) -> Node:
        node = self.expr()
        if self.peek().kind != "end":
            raise self.fail("an operator or end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text == VARIABLE:
                return Var()
            if self.peek().kind == "op" and self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownIdentifier(tok.text, tok.offset)
                self.advance()
                arg = self.expr()
                if not (self.peek().kind == "op" and self.peek().text == ")"):
                    raise self.fail("')'")
                self.advance()
                return Call(tok.text, arg)
            raise UnknownIdentifier(tok.text, tok.offset)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            if not (self.peek().kind == "op" and self.peek().text == ")"):
                raise self.fail("')'")
            self.advance()
            return node
        raise self.fail("a number, 't', a function call, or '('")


# ---------------------------------------------------------------------------
# evaluation and printing

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POWER, _PREC_ATOM = 0, 1, 2, 3, 4


def _precedence(node: Node) -> int:
    if isinstance(node, BinOp):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POWER
    if isinstance(node, Neg):
        return _PREC_UNARY
    return _PREC_ATOM


def _render(node: Node, minimum: int) -> str:
    prec = _precedence(node)
    if isinstance(node, Num):
        text = repr(node.value)
    elif isinstance(node, Var):
        text = VARIABLE
    elif isinstance(node, Neg):
        text = "-" + _render(node.operand, _PREC_UNARY)
    elif isinstance(node, Call):
        text = f"{node.fn}({_render(node.arg, _PREC_ADD)})"
    else:
        if node.op in "+-":
            text = f"{_render(node.left, _PREC_ADD)} {node.op} {_render(node.right, _PREC_MUL)}"
        elif node.op in "*/":
            text = f"{_render(node.left, _PREC_MUL)}{node.op}{_render(node.right, _PREC_UNARY)}"
        else:
            text = f"{_render(node.left, _PREC_ATOM)}^{_render(node.right, _PREC_UNARY)}"
    if prec < minimum:
        return f"({text})"
    return text


def _evaluate(node: Node, t: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full_like(t, node.value)
    if isinstance(node, Var):
        return t.copy()
    if isinstance(node, Neg):
        return -_evaluate(node.operand, t)
    if isinstance(node, Call):
        return FUNCTIONS[node.fn](_evaluate(node.arg, t))
    left = _evaluate(node.left, t)
    right = _evaluate(node.right, t)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return left / right
    return np.power(left, right)


@dataclass(frozen=True)
class KernelExpression:
    """A parsed expression in the single variable t, evaluable on arrays."""

    root: Node
    source: str

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            out = _evaluate(self.root, np.atleast_1d(arr))
        bad = ~np.isfinite(out)
        if np.any(bad):
            where = float(np.atleast_1d(arr)[np.argmax(bad)])
            raise EvaluationError(
                f"expression {self.source!r} is not finite at t={where!r}"
            )
        if arr.ndim == 0:
            return float(out[0])
        return out

    def pretty(self) -> str:
        return _render(self.root, _PREC_ADD)


def parse_kernel_expression(source: str) -> KernelExpression:
    """Parse expression text into a KernelExpression.

    Raises ExpressionSyntaxError (with offset and expectation) on malformed
    input and UnknownIdentifier for names outside {t, exp, sin, cos, sqrt,
    log}.
    """
    return KernelExpression(_Parser(source).parse(), source)
