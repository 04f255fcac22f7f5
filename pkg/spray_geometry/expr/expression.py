"""Scalar expressions over the 2n chart coordinates (x1..xn, y1..yn)."""

from __future__ import annotations

import math
import operator
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from spray_geometry.errors import DimensionMismatchError, DomainError, IndexOutOfRangeError
from spray_geometry.expr.derivative import differentiate_node
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
    const,
    divide,
    power,
    render,
    walk,
)
from spray_geometry.expr.parser import parse_node

Compiled = Callable[[Sequence[float]], float]


@dataclass(frozen=True)
class Point:
    """A point u = (x, y) of the tangent bundle in an induced chart."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y) or not self.x:
            raise DimensionMismatchError(
                f"point needs n base and n fiber coordinates, got {len(self.x)} and {len(self.y)}"
            )

    @classmethod
    def from_coordinates(cls, z: Iterable[float]) -> "Point":
        values = [float(v) for v in z]
        if len(values) % 2:
            raise DimensionMismatchError(f"odd number of coordinates: {len(values)}")
        n = len(values) // 2
        return cls(tuple(values[:n]), tuple(values[n:]))

    @property
    def dim(self) -> int:
        return len(self.x)

    @property
    def z(self) -> tuple[float, ...]:
        return self.x + self.y

    def coordinates(self) -> np.ndarray:
        return np.array(self.z)

    def fiber(self) -> np.ndarray:
        return np.array(self.y)


def coordinate_slot(var: int | str, dim: int) -> int:
    """Slot of a coordinate: x_i -> i-1, y_i -> n+i-1.  Integers pass through."""
    if isinstance(var, str):
        kind, digits = var[:1], var[1:]
        if kind not in ("x", "y") or not digits.isdigit() or digits != str(int(digits)):
            raise ValueError(f"not a coordinate name: {var!r}")
        index = int(digits)
        if not 1 <= index <= dim:
            raise IndexOutOfRangeError(f"coordinate '{var}' out of range for dimension {dim}")
        return index - 1 + (dim if kind == "y" else 0)
    if not 0 <= var < 2 * dim:
        raise IndexOutOfRangeError(f"coordinate slot {var} out of range for dimension {dim}")
    return var


def slot_name(slot: int, dim: int) -> str:
    return f"x{slot + 1}" if slot < dim else f"y{slot - dim + 1}"


def _located(error: DomainError, node: Node) -> DomainError:
    return DomainError(error.args[0], render(node))


def _compile(node: Node, dim: int) -> Compiled:
    if isinstance(node, Const):
        value = node.value
        return lambda z: value
    if isinstance(node, Var):
        return operator.itemgetter(node.index - 1 + (dim if node.kind == "y" else 0))
    if isinstance(node, Neg):
        f = _compile(node.operand, dim)
        return lambda z: -f(z)
    if isinstance(node, Call):
        f = _compile(node.arg, dim)
        impl = FUNCTIONS[node.func]

        def call(z):
            a = f(z)
            try:
                return impl(a)
            except DomainError as e:
                raise _located(e, node) from None
            except (ValueError, OverflowError) as e:
                raise DomainError(str(e), render(node)) from e

        return call

    lf = _compile(node.left, dim)
    rf = _compile(node.right, dim)
    if isinstance(node, Add):
        return lambda z: lf(z) + rf(z)
    if isinstance(node, Sub):
        return lambda z: lf(z) - rf(z)
    if isinstance(node, Mul):
        return lambda z: lf(z) * rf(z)
    if isinstance(node, (Div, Pow)):
        binary = divide if isinstance(node, Div) else power

        def checked(z):
            a, b = lf(z), rf(z)
            try:
                return binary(a, b)
            except DomainError as e:
                raise _located(e, node) from None

        return checked
    raise TypeError(f"cannot compile {type(node).__name__}")


@dataclass(frozen=True)
class ScalarExpression:
    """Immutable closed-form function of the chart coordinates.

    Partial derivatives are memoised per sorted multi-index, so a field's
    jets reuse the same derivative trees (and their compiled closures).
    """

    node: Node
    dim: int
    _partials: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatchError(f"dimension must be positive, got {self.dim}")
        for sub in walk(self.node):
            if isinstance(sub, Var) and not 1 <= sub.index <= self.dim:
                raise IndexOutOfRangeError(
                    f"variable '{sub.name}' out of range for dimension {self.dim}"
                )

    @classmethod
    def parse(cls, text: str, dim: int) -> "ScalarExpression":
        return cls(parse_node(text, dim), dim)

    @classmethod
    def constant(cls, value: float, dim: int) -> "ScalarExpression":
        return cls(const(value), dim)

    def __str__(self) -> str:
        return render(self.node)

    @cached_property
    def compiled(self) -> Compiled:
        return _compile(self.node, self.dim)

    @property
    def is_constant(self) -> bool:
        return isinstance(self.node, Const)

    def variables(self) -> frozenset[int]:
        return frozenset(
            coordinate_slot(sub.name, self.dim) for sub in walk(self.node) if isinstance(sub, Var)
        )

    def evaluate_at(self, z: Sequence[float]) -> float:
        value = self.compiled(z)
        if not math.isfinite(value):
            raise DomainError("non-finite result", str(self))
        return float(value)

    def evaluate(self, u: Point) -> float:
        if u.dim != self.dim:
            raise DimensionMismatchError(
                f"point of dimension {u.dim} for expression of dimension {self.dim}"
            )
        return self.evaluate_at(u.z)

    def differentiate(self, var: int | str) -> "ScalarExpression":
        slot = coordinate_slot(var, self.dim)
        kind = "x" if slot < self.dim else "y"
        index = slot % self.dim + 1
        return ScalarExpression(differentiate_node(self.node, kind, index), self.dim)

    def partial(self, slots: Sequence[int]) -> "ScalarExpression":
        """Mixed partial derivative over the given slots (order-insensitive)."""
        key = tuple(sorted(coordinate_slot(s, self.dim) for s in slots))
        if not key:
            return self
        cached = self._partials.get(key)
        if cached is None:
            cached = self.partial(key[:-1]).differentiate(key[-1])
            self._partials[key] = cached
        return cached


def parse(text: str, dim: int) -> ScalarExpression:
    return ScalarExpression.parse(text, dim)


def evaluate(e: ScalarExpression, u: Point) -> float:
    return e.evaluate(u)


def differentiate(e: ScalarExpression, var: int | str) -> ScalarExpression:
    return e.differentiate(var)
