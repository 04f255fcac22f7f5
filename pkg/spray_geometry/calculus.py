"""Jets of scalar fields and the finite-difference oracle.

A jet collects the value and every partial derivative up to order 3 of an
expression at one point.  Slots follow ``coordinate_slot``: x-coordinates
first, then y-coordinates.  ``finite_difference_partial`` exists for tests
only; nothing on a production path calls it.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations

import numpy as np

from spray_geometry.errors import DimensionMismatchError, DomainError
from spray_geometry.expr import Point, ScalarExpression, coordinate_slot

MAX_ORDER = 3


@dataclass(frozen=True, eq=False)
class Jet:
    """Value and partials of a scalar field at a point.

    Slots above ``order`` are zero-filled; ``order`` records how far the jet
    was actually computed.
    """

    point: Point
    order: int
    value: float
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray

    @property
    def dim(self) -> int:
        return self.point.dim

    def x_grad(self) -> np.ndarray:
        return self.grad[: self.dim]

    def y_grad(self) -> np.ndarray:
        return self.grad[self.dim :]

    def __add__(self, other: "Jet") -> "Jet":
        if self.point != other.point:
            raise DimensionMismatchError("jets taken at different points")
        return Jet(
            self.point,
            min(self.order, other.order),
            self.value + other.value,
            self.grad + other.grad,
            self.hess + other.hess,
            self.third + other.third,
        )


def _evaluate_partial(e: ScalarExpression, slots: tuple[int, ...], z: tuple[float, ...]) -> float:
    try:
        return e.partial(slots).evaluate_at(z)
    except DomainError as err:
        raise DomainError(err.args[0], err.subexpression, partial=slots) from err


def jet(e: ScalarExpression, u: Point, order: int = 2) -> Jet:
    """All partials of ``e`` at ``u`` up to ``order`` (at most 3)."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"jet order must be between 0 and {MAX_ORDER}, got {order}")
    if u.dim != e.dim:
        raise DimensionMismatchError(f"point of dimension {u.dim} for field of dimension {e.dim}")
    m = 2 * e.dim
    z = u.z
    value = _evaluate_partial(e, (), z)
    grad = np.zeros(m)
    hess = np.zeros((m, m))
    third = np.zeros((m, m, m))
    if order >= 1:
        for i in range(m):
            grad[i] = _evaluate_partial(e, (i,), z)
    if order >= 2:
        for i, j in combinations_with_replacement(range(m), 2):
            hess[i, j] = hess[j, i] = _evaluate_partial(e, (i, j), z)
    if order >= 3:
        for slots in combinations_with_replacement(range(m), 3):
            v = _evaluate_partial(e, slots, z)
            for perm in set(permutations(slots)):
                third[perm] = v
    return Jet(u, order, value, grad, hess, third)


def finite_difference_partial(
    e: ScalarExpression,
    u: Point,
    multi_index: Sequence[int | str],
    h: float = 1e-5,
) -> float:
    """Central-difference estimate of a partial of order 0, 1 or 2; error O(h^2)."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    slots = [coordinate_slot(s, e.dim) for s in multi_index]
    if len(slots) > 2:
        raise ValueError("finite differences are provided up to order 2")
    z = np.array(u.z)

    def f(*shifts: tuple[int, float]) -> float:
        shifted = z.copy()
        for slot, step in shifts:
            shifted[slot] += step
        return e.evaluate_at(tuple(shifted))

    if not slots:
        return f()
    if len(slots) == 1:
        (i,) = slots
        return (f((i, h)) - f((i, -h))) / (2 * h)
    i, j = slots
    if i == j:
        return (f((i, h)) - 2 * f() + f((i, -h))) / (h * h)
    return (f((i, h), (j, h)) - f((i, h), (j, -h)) - f((i, -h), (j, h)) + f((i, -h), (j, -h))) / (
        4 * h * h
    )
