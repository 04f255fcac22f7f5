"""Expression tree nodes, simplifying constructors and printing.

Trees are immutable.  The lower-case constructors (``add``, ``mul``, ...) fold
constants and drop identities (0·e, e+0, 1·e, e^1, --e) so that repeated
differentiation keeps trees small; they never reorder or canonicalise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from spray_geometry.errors import DomainError

ATOM = 5


@dataclass(frozen=True)
class Node:
    precedence = ATOM


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    """Chart coordinate ``x<index>`` or ``y<index>`` (1-based)."""

    kind: str
    index: int

    @property
    def name(self) -> str:
        return f"{self.kind}{self.index}"


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    precedence = 3


@dataclass(frozen=True)
class BinaryOperator(Node):
    left: Node
    right: Node
    symbol = "?"


@dataclass(frozen=True)
class Add(BinaryOperator):
    symbol = "+"
    precedence = 1


@dataclass(frozen=True)
class Sub(BinaryOperator):
    symbol = "-"
    precedence = 1


@dataclass(frozen=True)
class Mul(BinaryOperator):
    symbol = "*"
    precedence = 2


@dataclass(frozen=True)
class Div(BinaryOperator):
    symbol = "/"
    precedence = 2


@dataclass(frozen=True)
class Pow(BinaryOperator):
    symbol = "^"
    precedence = 4


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


ZERO = Const(0.0)
ONE = Const(1.0)
TWO = Const(2.0)


# ---------------------------------------------------------------------------
# Arithmetic with domain checks (shared by folding and evaluation)
# ---------------------------------------------------------------------------

def divide(numerator: float, denominator: float) -> float:
    if denominator == 0:
        raise DomainError("division by zero")
    return numerator / denominator


def power(base: float, exponent: float) -> float:
    try:
        if float(exponent).is_integer():
            if base == 0 and exponent < 0:
                raise DomainError("zero raised to a negative power")
            return base ** int(exponent)
        if base <= 0:
            raise DomainError("real exponent needs a positive base")
        return base ** exponent
    except OverflowError as e:
        raise DomainError("power overflow") from e


def _log(value: float) -> float:
    if value <= 0:
        raise DomainError("log of non-positive argument")
    return math.log(value)


def _sqrt(value: float) -> float:
    if value < 0:
        raise DomainError("sqrt of negative argument")
    return math.sqrt(value)


def _exp(value: float) -> float:
    try:
        return math.exp(value)
    except OverflowError as e:
        raise DomainError("exp overflow") from e


FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "tanh": math.tanh,
}


# ---------------------------------------------------------------------------
# Simplifying constructors
# ---------------------------------------------------------------------------

def is_const(node: Node, value: float | None = None) -> bool:
    return isinstance(node, Const) and (value is None or node.value == value)


def _fold(fn, *values: float) -> Const | None:
    try:
        result = fn(*values)
    except (ArithmeticError, ValueError):
        return None
    if isinstance(result, complex) or not math.isfinite(result):
        return None
    return Const(float(result))


def const(value: float) -> Const:
    return Const(float(value))


def neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def add(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda p, q: p + q, a.value, b.value) or Add(a, b)
    if is_const(a, 0):
        return b
    if is_const(b, 0):
        return a
    return Add(a, b)


def sub(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda p, q: p - q, a.value, b.value) or Sub(a, b)
    if is_const(b, 0):
        return a
    if is_const(a, 0):
        return neg(b)
    return Sub(a, b)


def mul(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(lambda p, q: p * q, a.value, b.value) or Mul(a, b)
    if is_const(a, 0) or is_const(b, 0):
        return ZERO
    if is_const(a, 1):
        return b
    if is_const(b, 1):
        return a
    if is_const(a, -1):
        return neg(b)
    if is_const(b, -1):
        return neg(a)
    return Mul(a, b)


def div(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(divide, a.value, b.value) or Div(a, b)
    if is_const(b, 1):
        return a
    if is_const(a, 0):
        return ZERO
    return Div(a, b)


def pow_(a: Node, b: Node) -> Node:
    if isinstance(b, Const):
        if b.value == 0:
            return ONE
        if b.value == 1:
            return a
        if isinstance(a, Const):
            return _fold(power, a.value, b.value) or Pow(a, b)
    if is_const(a, 1):
        return ONE
    return Pow(a, b)


def call(func: str, a: Node) -> Node:
    if isinstance(a, Const):
        return _fold(FUNCTIONS[func], a.value) or Call(func, a)
    return Call(func, a)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _format_number(value: float) -> str:
    magnitude = abs(value)
    if magnitude.is_integer() and magnitude < 1e16:
        text = str(int(magnitude))
    else:
        text = repr(magnitude)
    if math.copysign(1.0, value) < 0:
        return f"(-{text})"
    return text


def _wrap(node: Node, parenthesise: bool) -> str:
    text = render(node)
    return f"({text})" if parenthesise else text


def render(node: Node) -> str:
    """Infix text that parses back to a structurally equal tree."""
    if isinstance(node, Const):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({render(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, node.operand.precedence < Neg.precedence)
    if isinstance(node, Pow):
        base = _wrap(node.left, node.left.precedence < ATOM)
        exponent = _wrap(node.right, node.right.precedence < Neg.precedence)
        return f"{base}^{exponent}"
    if isinstance(node, BinaryOperator):
        p = node.precedence
        left = _wrap(node.left, node.left.precedence < p)
        right = _wrap(node.right, node.right.precedence <= p)
        if isinstance(node, (Add, Sub)):
            return f"{left} {node.symbol} {right}"
        return f"{left}{node.symbol}{right}"
    raise TypeError(f"cannot render {type(node).__name__}")


def walk(node: Node):
    """Yield every node of the tree, parents before children."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        if isinstance(current, BinaryOperator):
            stack.append(current.right)
            stack.append(current.left)
        elif isinstance(current, Neg):
            stack.append(current.operand)
        elif isinstance(current, Call):
            stack.append(current.arg)
