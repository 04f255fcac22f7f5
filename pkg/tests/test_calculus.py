import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spray_geometry.calculus import finite_difference_partial, jet
from spray_geometry.errors import DimensionMismatchError, DomainError
from spray_geometry.expr import Point, parse
from tests.strategies import expression_texts, points


def test_quadratic_jet():
    u = Point((0.5,), (3.0,))
    j = jet(parse("y1^2", 1), u, 2)
    assert j.value == 9
    np.testing.assert_array_equal(j.grad, [0.0, 6.0])
    np.testing.assert_array_equal(j.hess, [[0.0, 0.0], [0.0, 2.0]])


def test_bilinear_jet():
    j = jet(parse("x1*y1", 1), Point((2.0,), (5.0,)), 2)
    assert j.hess[0, 1] == 1 and j.hess[1, 0] == 1
    assert j.hess[0, 0] == 0 and j.hess[1, 1] == 0


def test_poincare_third_partial():
    j = jet(parse("(y1^2 + y2^2)/x2^2", 2), Point((0.0, 1.0), (1.0, 0.0)), 3)
    # slots: x1, x2, y1, y2
    assert j.third[2, 2, 1] == pytest.approx(-4.0)
    assert j.third[1, 2, 2] == j.third[2, 1, 2] == j.third[2, 2, 1]


def test_third_partial_matches_finite_difference_of_second():
    e = parse("(y1^2 + y2^2)/x2^2", 2)
    u = Point((0.0, 1.0), (1.0, 0.0))
    second = e.partial(("y1", "y1"))
    assert finite_difference_partial(second, u, ["x2"]) == pytest.approx(-4.0, abs=1e-8)


def test_orders_below_three_are_zero_filled():
    j = jet(parse("y1^3", 1), Point((0.0,), (1.0,)), 1)
    assert j.order == 1
    assert not j.hess.any() and not j.third.any()


def test_domain_error_names_the_partial():
    e = parse("x1*y1 + log(y1)", 1)
    with pytest.raises(DomainError) as info:
        jet(e, Point((1.0,), (-1.0,)), 2)
    assert info.value.partial == ()


def test_jet_order_out_of_range():
    with pytest.raises(ValueError):
        jet(parse("x1", 1), Point((0.0,), (0.0,)), 4)


def test_jets_add():
    u = Point((0.2,), (0.4,))
    a, b = parse("x1*y1", 1), parse("y1^2", 1)
    total = jet(a, u, 3) + jet(b, u, 3)
    expected = jet(parse("x1*y1 + y1^2", 1), u, 3)
    assert total.order == 3
    assert total.value == pytest.approx(expected.value, abs=1e-12)
    for field in ("grad", "hess", "third"):
        np.testing.assert_allclose(getattr(total, field), getattr(expected, field), atol=1e-12)


def test_jets_at_different_points_do_not_add():
    e = parse("x1", 1)
    with pytest.raises(DimensionMismatchError):
        jet(e, Point((0.0,), (0.0,)), 1) + jet(e, Point((1.0,), (0.0,)), 1)


class TestFiniteDifferences:
    def test_quadratic(self):
        u = Point((0.0,), (3.0,))
        assert finite_difference_partial(parse("y1^2", 1), u, ["y1"], h=1e-5) == pytest.approx(
            6.0, abs=1e-9
        )

    def test_cubic_second_derivative(self):
        u = Point((0.0,), (2.0,))
        estimate = finite_difference_partial(parse("y1^3", 1), u, ["y1", "y1"], h=1e-4)
        assert estimate == pytest.approx(12.0, abs=1e-6)

    def test_sine(self):
        u = Point((0.0,), (0.0,))
        assert finite_difference_partial(parse("sin(x1)", 1), u, ["x1"]) == pytest.approx(
            1.0, abs=1e-10
        )

    def test_mixed(self):
        u = Point((0.5,), (1.5,))
        estimate = finite_difference_partial(parse("x1^2*y1", 1), u, ["x1", "y1"], h=1e-4)
        assert estimate == pytest.approx(1.0, abs=1e-7)

    def test_order_three_is_refused(self):
        with pytest.raises(ValueError):
            finite_difference_partial(parse("x1", 1), Point((0.0,), (0.0,)), [0, 0, 0])


@st.composite
def jet_cases(draw):
    dim = draw(st.sampled_from([1, 2]))
    return parse(draw(expression_texts(dim)), dim), draw(points(dim))


@settings(max_examples=100)
@given(jet_cases())
def test_jet_symmetry(case):
    e, u = case
    j = jet(e, u, 3)
    assert np.max(np.abs(j.hess - j.hess.T)) < 1e-10
    for axes in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
        assert np.max(np.abs(j.third - j.third.transpose(axes))) < 1e-10


@settings(max_examples=100)
@given(jet_cases(), st.floats(-2, 2), st.floats(-2, 2))
def test_jet_linearity(case, a, b):
    e, u = case
    f = parse("sin(x1) + y1^2", e.dim)
    combined = parse(f"({a!r})*({e}) + ({b!r})*({f})", e.dim)
    lhs = jet(combined, u, 2)
    ja, jb = jet(e, u, 2), jet(f, u, 2)
    np.testing.assert_allclose(lhs.grad, a * ja.grad + b * jb.grad, atol=1e-12, rtol=1e-12)
    np.testing.assert_allclose(lhs.hess, a * ja.hess + b * jb.hess, atol=1e-12, rtol=1e-12)


@settings(max_examples=200)
@given(jet_cases(), st.data())
def test_hessian_matches_finite_differences(case, data):
    e, u = case
    i = data.draw(st.integers(0, 2 * e.dim - 1))
    j = data.draw(st.integers(0, 2 * e.dim - 1))
    exact = jet(e, u, 2).hess[i, j]
    estimate = finite_difference_partial(e, u, [i, j], h=1e-4)
    scale = max(1.0, abs(exact), abs(e.evaluate(u)))
    assert abs(exact - estimate) <= 1e-5 * scale
