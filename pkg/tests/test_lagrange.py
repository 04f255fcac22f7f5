import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spray_geometry.errors import DegenerateLagrangianError, SingularMetricError
from spray_geometry.expr import Point
from spray_geometry.geometry import (
    LagrangeSpace,
    canonic_connection,
    canonic_semispray,
    cartan_form,
    energy,
    energy_form_residual,
    euler_lagrange_residual,
    helmholtz_residual,
    lagrange_family_member,
    lagrange_metric,
    metric_semispray_derivative,
    nabla_metric,
    symplectic_adapted,
    unique_connection,
)
from tests.strategies import DIMS, lagrangians, points

CONFORMAL = LagrangeSpace.parse("exp(x1)*y1^2", 1)
GENERIC = Point((0.3, 1.4), (0.6, -0.2))


class TestMetric:
    def test_flat(self, flat_space):
        np.testing.assert_array_equal(lagrange_metric(flat_space, GENERIC), np.eye(2))

    def test_poincare_at_unit_height(self, poincare_space):
        u = Point((0.7, 1.0), (0.2, 0.9))
        np.testing.assert_allclose(lagrange_metric(poincare_space, u), np.eye(2), atol=1e-15)

    def test_degenerate(self):
        with pytest.raises(DegenerateLagrangianError):
            lagrange_metric(LagrangeSpace.parse("x1*y1", 1), Point((1.0,), (1.0,)))

    def test_degenerate_is_a_singular_metric(self):
        assert issubclass(DegenerateLagrangianError, SingularMetricError)

    def test_symbolic_metric_field_agrees(self, poincare_space):
        np.testing.assert_allclose(
            poincare_space.metric_field.values(GENERIC),
            lagrange_metric(poincare_space, GENERIC),
            atol=1e-14,
        )


class TestCanonicSemispray:
    def test_flat(self, flat_space):
        assert not canonic_semispray(flat_space, GENERIC).any()

    def test_poincare(self, poincare_space, poincare_start):
        np.testing.assert_allclose(
            canonic_semispray(poincare_space, poincare_start), [0.0, 0.5], atol=1e-12
        )

    def test_poincare_matches_christoffel_spray(self, poincare_space, poincare_spray):
        np.testing.assert_allclose(
            canonic_semispray(poincare_space, GENERIC),
            poincare_spray.coefficients(GENERIC),
            atol=1e-12,
        )

    @pytest.mark.parametrize("x1", [-0.5, 0.0, 1.2])
    def test_conformal(self, x1):
        assert canonic_semispray(CONFORMAL, Point((x1,), (1.0,)))[0] == pytest.approx(0.25)

    def test_y_jacobian_matches_symbolic_spray(self, poincare_space, poincare_spray):
        np.testing.assert_allclose(
            poincare_space.semispray.y_jacobian(GENERIC),
            poincare_spray.y_jacobian(GENERIC),
            atol=1e-12,
        )


class TestEnergy:
    def test_homogeneous(self, flat_space):
        u = Point((0.0, 0.0), (1.0, 2.0))
        assert energy(flat_space, u) == 5

    def test_potential(self):
        Lsp = LagrangeSpace.parse("y1^2 - x1", 1)
        assert energy(Lsp, Point((0.5,), (2.0,))) == pytest.approx(4.5)


class TestUniqueConnection:
    def test_flat(self, flat_space):
        assert not unique_connection(flat_space, GENERIC).matrix.any()

    def test_poincare(self, poincare_space, poincare_start):
        N = unique_connection(poincare_space, poincare_start)
        np.testing.assert_allclose(N.matrix, [[0, -1], [1, 0]], atol=1e-9)
        np.testing.assert_allclose(
            N.matrix, canonic_connection(poincare_space, poincare_start).matrix, atol=1e-9
        )

    def test_conformal(self):
        u = Point((0.4,), (1.7,))
        N = unique_connection(CONFORMAL, u)
        assert N.matrix[0, 0] == pytest.approx(CONFORMAL.semispray.y_jacobian(u)[0, 0])
        # G = y1^2/4 for this Lagrangian
        assert N.matrix[0, 0] == pytest.approx(1.7 / 2)

    @settings(max_examples=40)
    @given(st.data())
    def test_random_lagrangians(self, data):
        dim = data.draw(DIMS)
        Lsp = data.draw(lagrangians(dim))
        u = data.draw(points(dim))
        N = unique_connection(Lsp, u)
        canonic = canonic_connection(Lsp, u)
        assert np.max(np.abs(N.matrix - canonic.matrix)) < 1e-9

        sg = metric_semispray_derivative(Lsp.semispray, Lsp.metric_field, u)
        Lyx = Lsp.jet(u, 2).hess[dim:, :dim]
        assert np.max(np.abs(2 * canonic.sym - sg)) < 1e-9
        assert np.max(np.abs(canonic.skew - 0.25 * (Lyx - Lyx.T))) < 1e-9
        assert np.max(np.abs(helmholtz_residual(Lsp.semispray, Lsp.metric_field, u))) < 1e-9

        _, hh = symplectic_adapted(Lsp, N, u)
        assert np.max(np.abs(hh)) < 1e-9


class TestSymplecticAdapted:
    def test_unique_connection_makes_horizontal_lagrangian(self, poincare_space):
        g, hh = symplectic_adapted(poincare_space, unique_connection(poincare_space, GENERIC),
                                   GENERIC)
        np.testing.assert_allclose(g, lagrange_metric(poincare_space, GENERIC))
        assert np.max(np.abs(hh)) < 1e-9

    def test_symmetric_perturbation_keeps_hh(self, poincare_space):
        N = unique_connection(poincare_space, GENERIC)
        g = lagrange_metric(poincare_space, GENERIC)
        delta = np.array([[0.3, -0.2], [-0.2, 1.1]])
        perturbed = N.matrix + np.linalg.solve(g, delta)
        _, hh = symplectic_adapted(poincare_space, perturbed, GENERIC)
        assert np.max(np.abs(hh)) < 1e-9

    def test_zero_connection_is_not_lagrangian(self, poincare_space):
        u = Point((0.0, 1.0), (1.0, 0.0))
        _, hh = symplectic_adapted(poincare_space, np.zeros((2, 2)), u)
        # (1/4)(d2L/dy^i dx^j - d2L/dx^i dy^j) with d2L/dy1 dx2 = -4
        np.testing.assert_allclose(hh, [[0, -1], [1, 0]], atol=1e-12)


class TestFamily:
    def test_zero_deformation(self, poincare_space):
        member = lagrange_family_member(poincare_space, np.zeros((2, 2)), GENERIC)
        np.testing.assert_allclose(
            member.matrix, canonic_connection(poincare_space, GENERIC).matrix, atol=1e-15
        )

    def test_flat_skew_member_is_metric_but_not_symplectic(self, flat_space):
        X = np.array([[0.0, 1.0], [0.0, 0.0]])
        member = lagrange_family_member(flat_space, X, GENERIC)
        np.testing.assert_allclose(member.matrix, [[0, 0.5], [-0.5, 0]], atol=1e-15)
        residual = nabla_metric(flat_space.semispray, member, flat_space.metric_field, GENERIC)
        assert np.max(np.abs(residual)) < 1e-12
        _, hh = symplectic_adapted(flat_space, member, GENERIC)
        np.testing.assert_allclose(hh, [[0, -0.5], [0.5, 0]], atol=1e-15)

    def test_one_dimension(self):
        u = Point((0.1,), (0.9,))
        member = lagrange_family_member(CONFORMAL, np.array([[3.0]]), u)
        assert member.matrix[0, 0] == pytest.approx(canonic_connection(CONFORMAL, u).matrix[0, 0])

    @settings(max_examples=30)
    @given(st.data())
    def test_members_are_metric(self, data):
        dim = data.draw(st.sampled_from([2, 3]))
        Lsp = data.draw(lagrangians(dim))
        u = data.draw(points(dim))
        X = np.array(
            data.draw(st.lists(st.floats(-1, 1), min_size=dim * dim, max_size=dim * dim))
        ).reshape(dim, dim)
        member = lagrange_family_member(Lsp, X, u)
        residual = nabla_metric(Lsp.semispray, member, Lsp.metric_field, u)
        assert np.max(np.abs(residual)) < 1e-9


class TestCartanForm:
    def test_flat(self, flat_space):
        omega = cartan_form(flat_space, GENERIC)
        expected = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
        np.testing.assert_array_equal(omega, expected)

    def test_skew_and_nondegenerate(self, poincare_space):
        omega = cartan_form(poincare_space, GENERIC)
        np.testing.assert_allclose(omega, -omega.T, atol=1e-15)
        assert abs(np.linalg.det(omega)) > 1e-6

    @settings(max_examples=40)
    @given(st.data())
    def test_canonic_semispray_solves_the_dynamics(self, data):
        dim = data.draw(DIMS)
        Lsp = data.draw(lagrangians(dim))
        u = data.draw(points(dim))
        assert np.max(np.abs(euler_lagrange_residual(Lsp, u))) < 1e-9
        assert np.max(np.abs(energy_form_residual(Lsp, u))) < 1e-9

    def test_poincare_residuals(self, poincare_space):
        assert np.max(np.abs(euler_lagrange_residual(poincare_space, GENERIC))) < 1e-9
        assert np.max(np.abs(energy_form_residual(poincare_space, GENERIC))) < 1e-9
