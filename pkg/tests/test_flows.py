import math

import numpy as np
import pytest

from spray_geometry.errors import BlowUpError, IntegrationError
from spray_geometry.expr import Point
from spray_geometry.flows import (
    conservation_report,
    integrate_sode,
    parallel_transport,
    transported_norms,
)
from spray_geometry.geometry import (
    GLMetricField,
    LagrangeSpace,
    SemisprayField,
    metric_connection_field,
)


def geodesic_error(space: LagrangeSpace, start: Point, h: float, steps: int) -> float:
    """Max position error against x1 = tanh t, x2 = sech t."""
    traj = integrate_sode(space.semispray, start, h, steps)
    exact = np.stack([np.tanh(traj.times), 1.0 / np.cosh(traj.times)], axis=1)
    return float(np.max(np.abs(traj.states[:, :2] - exact)))


class TestIntegrate:
    def test_flat_lines_are_exact(self):
        traj = integrate_sode(SemisprayField.zero(2), Point((0, 0), (1, 2)), 0.01, 100)
        assert len(traj) == 101
        assert traj.times[-1] == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(traj.final_point.x, [1.0, 2.0], atol=1e-12)
        np.testing.assert_array_equal(traj.final_point.y, [1.0, 2.0])

    def test_grid_is_uniform(self):
        traj = integrate_sode(SemisprayField.zero(1), Point((0,), (1,)), 0.1, 7)
        np.testing.assert_allclose(np.diff(traj.times), 0.1, atol=1e-15)
        assert traj.h == 0.1 and traj.order == 4
        assert traj.duration == pytest.approx(0.7)

    def test_poincare_energy_is_conserved(self, poincare_space, poincare_start):
        traj = integrate_sode(poincare_space.semispray, poincare_start, 1e-3, 1000)
        assert conservation_report(poincare_space, traj).max_drift < 1e-8

    def test_poincare_follows_the_semicircle(self, poincare_space, poincare_start):
        assert geodesic_error(poincare_space, poincare_start, 1e-2, 100) < 1e-8

    def test_convergence_order(self, poincare_space, poincare_start):
        coarse = geodesic_error(poincare_space, poincare_start, 0.02, 50)
        fine = geodesic_error(poincare_space, poincare_start, 0.01, 100)
        assert 3.8 <= math.log2(coarse / fine) <= 4.2

    def test_energy_drift_shrinks_with_the_step(self, poincare_space, poincare_start):
        coarse = integrate_sode(poincare_space.semispray, poincare_start, 0.1, 20)
        fine = integrate_sode(poincare_space.semispray, poincare_start, 0.05, 40)
        coarse_drift = conservation_report(poincare_space, coarse).max_drift
        fine_drift = conservation_report(poincare_space, fine).max_drift
        assert 3.8 <= math.log2(coarse_drift / fine_drift) <= 4.2

    def test_flat_energy_is_constant(self, flat_space):
        traj = integrate_sode(flat_space.semispray, Point((0, 0), (1, -1)), 0.1, 10)
        report = conservation_report(flat_space, traj)
        assert report.max_drift == 0
        assert len(report.energies) == len(traj)

    def test_perturbed_spray_drifts(self, poincare_space, poincare_start):
        perturbed = SemisprayField.from_texts(
            ["-y1*y2/x2 + 0.1", "(y1^2 - y2^2)/(2*x2)"]
        )
        traj = integrate_sode(perturbed, poincare_start, 1e-2, 100)
        assert conservation_report(poincare_space, traj).max_drift > 1e-3

    def test_blow_up_guard(self):
        G = SemisprayField.from_texts(["-y1^3"])
        with pytest.raises(BlowUpError) as info:
            integrate_sode(G, Point((0.0,), (10.0,)), 1e-3, 1000, box=[(-10.0, 10.0)])
        err = info.value
        assert err.reason.startswith("speed")
        assert err.last_time < 0.01
        assert len(err.trajectory) >= 1
        assert err.trajectory.times[-1] == err.last_time

    def test_leaving_the_box(self):
        traj_box = [(-1.0, 1.05)]
        with pytest.raises(BlowUpError) as info:
            integrate_sode(SemisprayField.zero(1), Point((0.0,), (1.0,)), 0.1, 20, box=traj_box)
        assert "left" in info.value.reason
        assert info.value.last_time == pytest.approx(1.0)

    def test_domain_error_mid_orbit(self):
        G = SemisprayField.from_texts(["log(1 - x1)"])
        with pytest.raises(IntegrationError) as info:
            integrate_sode(G, Point((0.0,), (1.0,)), 0.1, 50)
        assert not isinstance(info.value, BlowUpError)
        assert 0 < info.value.last_time < 1.0
        traj = info.value.trajectory
        assert traj.times[-1] == info.value.last_time
        assert len(traj) == round(info.value.last_time / 0.1) + 1
        assert np.all(traj.states[:, 0] < 1.0)

    @pytest.mark.parametrize("h, steps", [(0.0, 10), (-0.1, 10), (0.1, 0)])
    def test_invalid_grid(self, h, steps):
        with pytest.raises(ValueError):
            integrate_sode(SemisprayField.zero(1), Point((0,), (1,)), h, steps)


class TestTransport:
    def test_zero_connection_keeps_the_vector(self):
        G = SemisprayField.zero(2)
        traj = integrate_sode(G, Point((0, 0), (1, 1)), 0.1, 10)
        transported = parallel_transport(G, np.zeros((2, 2)), traj, [1.0, -2.0])
        np.testing.assert_array_equal(transported.values, np.tile([1.0, -2.0], (11, 1)))

    def test_metric_connection_preserves_the_norm(self, poincare_space, poincare_start):
        G, g = poincare_space.semispray, poincare_space.metric_field
        traj = integrate_sode(G, poincare_start, 1e-3, 1000)
        transported = parallel_transport(G, metric_connection_field(G, g), traj, [1.0, 0.0])
        assert transported.max_drift(g, traj) < 1e-7

    def test_metric_connection_on_a_non_variational_spray(self, helmholtz_control):
        G, g = helmholtz_control
        traj = integrate_sode(G, Point((1.0, 0.0), (0.0, 1.0)), 1e-2, 100)
        transported = parallel_transport(G, metric_connection_field(G, g), traj, [1.0, 1.0])
        assert transported.max_drift(g, traj) < 1e-7

    def test_induced_connection_drifts(self, helmholtz_control):
        G, g = helmholtz_control
        traj = integrate_sode(G, Point((1.0, 0.0), (0.0, 1.0)), 1e-2, 100)
        transported = parallel_transport(G, G.y_jacobian, traj, [1.0, 1.0])
        norms = transported_norms(g, transported, traj)
        assert norms[0] == pytest.approx(2.0)
        assert transported.max_drift(g, traj) > 1e-3

    def test_linearity(self, poincare_space, poincare_start):
        G = poincare_space.semispray
        traj = integrate_sode(G, poincare_start, 1e-2, 50)
        N = G.y_jacobian
        X = parallel_transport(G, N, traj, [1.0, 0.0]).values
        Y = parallel_transport(G, N, traj, [0.0, 1.0]).values
        Z = parallel_transport(G, N, traj, [2.0, -3.0]).values
        assert np.max(np.abs(Z - (2.0 * X - 3.0 * Y))) < 1e-10

    def test_single_sample_trajectory(self):
        G = SemisprayField.zero(1)
        traj = integrate_sode(G, Point((0,), (1,)), 0.1, 1)
        short = type(traj)(traj.times[:1], traj.states[:1], traj.h)
        transported = parallel_transport(G, np.zeros((1, 1)), short, [2.0])
        np.testing.assert_array_equal(transported.values, [[2.0]])

    def test_norms_need_the_same_grid(self):
        G = SemisprayField.zero(1)
        traj = integrate_sode(G, Point((0,), (1,)), 0.1, 4)
        other = integrate_sode(G, Point((0,), (1,)), 0.1, 5)
        transported = parallel_transport(G, np.zeros((1, 1)), other, [1.0])
        with pytest.raises(ValueError):
            transported_norms(GLMetricField.euclidean(1), transported, traj)
