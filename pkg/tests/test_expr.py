import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spray_geometry.calculus import finite_difference_partial
from spray_geometry.errors import (
    DimensionMismatchError,
    DomainError,
    ExpressionSyntaxError,
    IndexOutOfRangeError,
    UnknownIdentifierError,
)
from spray_geometry.expr import Point, ScalarExpression, coordinate_slot, parse, slot_name
from spray_geometry.expr.nodes import Add, Const, Div, Neg, Pow, Var
from tests.strategies import expression_cases, expression_texts


def at(x, y) -> Point:
    return Point(tuple(x), tuple(y))


class TestParse:
    def test_sum_of_squares(self):
        e = parse("y1^2 + y2^2", 2)
        assert e.node == Add(Pow(Var("y", 1), Const(2.0)), Pow(Var("y", 2), Const(2.0)))

    def test_quotient(self):
        e = parse("(y1^2+y2^2)/(x2^2)", 2)
        assert isinstance(e.node, Div)
        assert e.variables() == frozenset({1, 2, 3})

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRangeError) as info:
            parse("y3", 2)
        assert info.value.offset == 0

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError):
            parse("2*z1", 2)

    @pytest.mark.parametrize("text", ["x01", "y007", "x0"])
    def test_indices_have_no_leading_zero(self, text):
        with pytest.raises(UnknownIdentifierError):
            parse(text, 2)

    def test_syntax_error_reports_byte_offset(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse("x1 + * y1", 1)
        assert info.value.offset == 5
        assert info.value.caret().splitlines()[1] == "       ^"

    def test_unclosed_parenthesis(self):
        with pytest.raises(ExpressionSyntaxError):
            parse("sin(x1", 1)

    def test_unary_minus_binds_below_power(self):
        assert parse("-x1^2", 1).node == Neg(Pow(Var("x", 1), Const(2.0)))

    def test_power_is_right_associative(self):
        assert parse("x1^2^3", 1).node == Pow(Var("x", 1), Pow(Const(2.0), Const(3.0)))

    def test_negative_literal_folds(self):
        assert parse("-2", 1).node == Const(-2.0)

    def test_scientific_notation(self):
        assert parse("1.5e-3*x1", 1).evaluate(at([2.0], [0.0])) == pytest.approx(3e-3)


class TestEvaluate:
    def test_sum_of_squares(self):
        assert parse("y1^2+y2^2", 2).evaluate(at([0, 0], [1, 2])) == 5

    def test_poincare(self):
        assert parse("(y1^2+y2^2)/(x2^2)", 2).evaluate(at([0, 1], [1, 0])) == 1

    def test_division_by_zero(self):
        with pytest.raises(DomainError) as info:
            parse("1/x1", 1).evaluate(at([0], [1]))
        assert info.value.subexpression == "1/x1"

    def test_log_of_negative(self):
        with pytest.raises(DomainError):
            parse("log(x1)", 1).evaluate(at([-1], [0]))

    def test_real_power_needs_positive_base(self):
        with pytest.raises(DomainError):
            parse("x1^0.5", 1).evaluate(at([-4], [0]))
        assert parse("x1^0.5", 1).evaluate(at([4], [0])) == 2

    def test_integral_power_of_negative_base(self):
        assert parse("x1^3", 1).evaluate(at([-2], [0])) == -8

    def test_exp_overflow(self):
        with pytest.raises(DomainError):
            parse("exp(x1)", 1).evaluate(at([1000], [0]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            parse("x1", 1).evaluate(at([0, 0], [0, 0]))

    def test_functions(self):
        u = at([0.3], [0.7])
        e = parse("sin(x1) + cos(y1) + tanh(x1*y1) + sqrt(y1) + log(y1) + exp(x1)", 1)
        expected = (
            math.sin(0.3) + math.cos(0.7) + math.tanh(0.21)
            + math.sqrt(0.7) + math.log(0.7) + math.exp(0.3)
        )
        assert e.evaluate(u) == pytest.approx(expected, abs=1e-15)


class TestDifferentiate:
    def test_quadratic(self):
        assert str(parse("y1^2+y2^2", 2).differentiate("y1")) == "2*y1"

    def test_independent_variable(self):
        d = parse("x1*y1", 2).differentiate("y2")
        assert d.is_constant and d.evaluate(at([1, 2], [3, 4])) == 0

    def test_quotient(self):
        e = parse("(y1^2+y2^2)/(x2^2)", 2)
        d = e.differentiate("x2")
        expected = parse("-2*(y1^2+y2^2)/(x2^3)", 2)
        for u in (at([0, 1], [1, 0]), at([0.3, 1.7], [-0.4, 2.2])):
            assert d.evaluate(u) == pytest.approx(expected.evaluate(u), rel=1e-14)

    def test_third_order(self):
        e = parse("(y1^2+y2^2)/x2^2", 2)
        assert e.partial(("y1", "y1", "x2")).evaluate(at([0, 1], [1, 0])) == pytest.approx(-4)

    def test_partials_are_order_insensitive_and_cached(self):
        e = parse("sin(x1*y1)", 1)
        assert e.partial(("x1", "y1")) is e.partial(("y1", "x1"))

    def test_real_power_rule(self):
        e = parse("x1^y1", 1)
        u = at([2.0], [3.0])
        assert e.differentiate("y1").evaluate(u) == pytest.approx(8 * math.log(2))
        assert e.differentiate("x1").evaluate(u) == pytest.approx(12)

    def test_derivative_trees_stay_small(self):
        e = parse("x1*y1 + 3", 1)
        assert str(e.partial(("x1", "y1"))) == "1"
        assert str(e.partial(("x1", "x1"))) == "0"

    @settings(max_examples=500)
    @given(expression_cases())
    def test_matches_finite_differences(self, case):
        e, u, slot = case
        exact = e.partial((slot,)).evaluate(u)
        estimate = finite_difference_partial(e, u, [slot], h=1e-5)
        scale = max(1.0, abs(exact), abs(e.evaluate(u)))
        assert abs(exact - estimate) <= 1e-6 * scale

    @settings(max_examples=300)
    @given(expression_cases(), st.data())
    def test_mixed_partials_commute(self, case, data):
        e, u, a = case
        b = data.draw(st.integers(0, 2 * e.dim - 1))
        ab = e.differentiate(a).differentiate(b).evaluate(u)
        ba = e.differentiate(b).differentiate(a).evaluate(u)
        assert abs(ab - ba) <= 1e-12 * max(1.0, abs(ab))


class TestPrinting:
    def test_negative_constants_are_parenthesised(self):
        assert str(ScalarExpression.constant(-2.0, 1)) == "(-2)"

    @pytest.mark.parametrize(
        "text",
        ["x1 - (x2 - y1)", "x1/(x2*y1)", "-x1^2", "x1^-y1", "(x1^2)^3", "x1*-y2", "(-2)^2"],
    )
    def test_fewest_parentheses_reparse(self, text):
        e = parse(text, 2)
        assert parse(str(e), 2) == e

    @given(expression_texts(2))
    def test_round_trip(self, text):
        e = parse(text, 2)
        assert parse(str(e), 2) == e


class TestSlots:
    def test_names_and_slots(self):
        assert coordinate_slot("x2", 3) == 1
        assert coordinate_slot("y1", 3) == 3
        assert slot_name(4, 3) == "y2"

    def test_slot_out_of_range(self):
        with pytest.raises(IndexOutOfRangeError):
            coordinate_slot("y4", 3)

    def test_slot_names_are_canonical(self):
        with pytest.raises(ValueError):
            coordinate_slot("x01", 3)

    def test_point_from_coordinates(self):
        u = Point.from_coordinates([1, 2, 3, 4])
        assert u.x == (1.0, 2.0) and u.y == (3.0, 4.0)
        with pytest.raises(DimensionMismatchError):
            Point.from_coordinates([1, 2, 3])
