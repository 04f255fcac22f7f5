"""Exact symbolic partial derivatives of expression trees."""

from functools import singledispatch

from spray_geometry.expr.nodes import (
    ONE,
    TWO,
    ZERO,
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
    add,
    call,
    const,
    div,
    is_const,
    mul,
    neg,
    pow_,
    sub,
)


@singledispatch
def differentiate_node(node: Node, kind: str, index: int) -> Node:
    raise NotImplementedError(f"cannot differentiate a {type(node).__name__}")


@differentiate_node.register
def _(node: Const, kind: str, index: int) -> Node:
    return ZERO


@differentiate_node.register
def _(node: Var, kind: str, index: int) -> Node:
    return ONE if (node.kind, node.index) == (kind, index) else ZERO


@differentiate_node.register
def _(node: Neg, kind: str, index: int) -> Node:
    return neg(differentiate_node(node.operand, kind, index))


@differentiate_node.register
def _(node: Add, kind: str, index: int) -> Node:
    da = differentiate_node(node.left, kind, index)
    return add(da, differentiate_node(node.right, kind, index))


@differentiate_node.register
def _(node: Sub, kind: str, index: int) -> Node:
    da = differentiate_node(node.left, kind, index)
    return sub(da, differentiate_node(node.right, kind, index))


@differentiate_node.register
def _(node: Mul, kind: str, index: int) -> Node:
    da = differentiate_node(node.left, kind, index)
    db = differentiate_node(node.right, kind, index)
    return add(mul(da, node.right), mul(node.left, db))


@differentiate_node.register
def _(node: Div, kind: str, index: int) -> Node:
    a, b = node.left, node.right
    da = differentiate_node(a, kind, index)
    db = differentiate_node(b, kind, index)
    if is_const(db, 0):
        return div(da, b)
    # (a'b - ab') / b^2
    return div(sub(mul(da, b), mul(a, db)), pow_(b, TWO))


@differentiate_node.register
def _(node: Pow, kind: str, index: int) -> Node:
    a, b = node.left, node.right
    da = differentiate_node(a, kind, index)
    if isinstance(b, Const):
        return mul(mul(b, pow_(a, const(b.value - 1))), da)
    db = differentiate_node(b, kind, index)
    if is_const(db, 0):
        return mul(mul(b, pow_(a, sub(b, ONE))), da)
    # a^b (b' log a + b a'/a); needs a > 0, as evaluation of a real power does
    return mul(node, add(mul(db, call("log", a)), div(mul(b, da), a)))


@differentiate_node.register
def _(node: Call, kind: str, index: int) -> Node:
    a = node.arg
    da = differentiate_node(a, kind, index)
    if is_const(da, 0):
        return ZERO
    if node.func == "sin":
        return mul(call("cos", a), da)
    if node.func == "cos":
        return neg(mul(call("sin", a), da))
    if node.func == "exp":
        return mul(node, da)
    if node.func == "log":
        return div(da, a)
    if node.func == "sqrt":
        return div(da, mul(TWO, node))
    if node.func == "tanh":
        return mul(sub(ONE, pow_(node, TWO)), da)
    raise NotImplementedError(f"no derivative rule for '{node.func}'")
