"""Recursive-descent parser for chart-coordinate expressions.

Grammar (see docs/grammar.md)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := ("-" | "+") unary | power
    power := atom ("^" unary)?
    atom  := NUMBER | VARIABLE | FUNC "(" expr ")" | "(" expr ")"
"""

from __future__ import annotations

import re
from typing import NamedTuple

from spray_geometry.errors import (
    ExpressionSyntaxError,
    IndexOutOfRangeError,
    UnknownIdentifierError,
)
from spray_geometry.expr.nodes import (
    FUNCTIONS,
    Add,
    Call,
    Const,
    Div,
    Mul,
    Neg,
    Node,
    Pow,
    Sub,
    Var,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)
_VARIABLE_RE = re.compile(r"([xy])([1-9]\d*)")


class Token(NamedTuple):
    type: str
    value: str
    offset: int


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def tokenize(text: str) -> list[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if match is None:
            raise ExpressionSyntaxError(
                f"unexpected character {text[position]!r}", text, _byte_offset(text, position)
            )
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), _byte_offset(text, position)))
        position = match.end()
    tokens.append(Token("end", "", _byte_offset(text, len(text))))
    return tokens


class Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.tokens = tokenize(text)
        self.position = 0

    @property
    def token(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.token
        self.position += 1
        return token

    def expect(self, value: str) -> Token:
        if self.token.value != value or self.token.type != "op":
            self.fail(f"expected '{value}'")
        return self.advance()

    def fail(self, message: str, token: Token | None = None):
        token = token or self.token
        found = "end of input" if token.type == "end" else f"'{token.value}'"
        raise ExpressionSyntaxError(f"{message}, found {found}", self.text, token.offset)

    def parse(self) -> Node:
        node = self.expression()
        if self.token.type != "end":
            self.fail("unexpected token")
        return node

    def expression(self) -> Node:
        node = self.term()
        while self.token.type == "op" and self.token.value in "+-":
            op = self.advance().value
            right = self.term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.token.type == "op" and self.token.value in "*/":
            op = self.advance().value
            right = self.unary()
            node = Mul(node, right) if op == "*" else Div(node, right)
        return node

    def unary(self) -> Node:
        if self.token.type == "op" and self.token.value in "+-":
            op = self.advance().value
            operand = self.unary()
            if op == "+":
                return operand
            if isinstance(operand, Const):
                return Const(-operand.value)
            return Neg(operand)
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.token.type == "op" and self.token.value == "^":
            self.advance()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Node:
        token = self.token
        if token.type == "number":
            self.advance()
            return Const(float(token.value))
        if token.type == "name":
            self.advance()
            return self.identifier(token)
        if token.type == "op" and token.value == "(":
            self.advance()
            node = self.expression()
            self.expect(")")
            return node
        self.fail("expected a number, variable, function or '('")

    def identifier(self, token: Token) -> Node:
        if token.value in FUNCTIONS:
            self.expect("(")
            arg = self.expression()
            self.expect(")")
            return Call(token.value, arg)
        match = _VARIABLE_RE.fullmatch(token.value)
        if match is None:
            raise UnknownIdentifierError(
                f"unknown identifier '{token.value}'", self.text, token.offset
            )
        index = int(match.group(2))
        if not 1 <= index <= self.dim:
            raise IndexOutOfRangeError(
                f"variable '{token.value}' out of range for dimension {self.dim}",
                self.text,
                token.offset,
            )
        return Var(match.group(1), index)


def parse_node(text: str, dim: int) -> Node:
    return Parser(text, dim).parse()
