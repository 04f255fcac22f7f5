"""Parsing, evaluation and exact differentiation of chart-coordinate expressions."""

from spray_geometry.expr.expression import (
    Point,
    ScalarExpression,
    coordinate_slot,
    differentiate,
    evaluate,
    parse,
    slot_name,
)

__all__ = [
    "Point",
    "ScalarExpression",
    "coordinate_slot",
    "differentiate",
    "evaluate",
    "parse",
    "slot_name",
]
