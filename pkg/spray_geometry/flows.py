"""Integral curves of a semispray, parallel transport along them and energy diagnostics.

Everything here is fixed-step classical RK4 on the grid t_k = k h.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from spray_geometry.config import DEFAULT_MAX_SPEED
from spray_geometry.errors import (
    BlowUpError,
    DimensionMismatchError,
    DomainError,
    IntegrationError,
    SingularMetricError,
)
from spray_geometry.expr import Point
from spray_geometry.geometry import (
    ConnectionField,
    ConnectionValue,
    GLMetricField,
    LagrangeSpace,
    Semispray,
    connection_at,
    energy,
)

logger = logging.getLogger(__name__)

Box = Sequence[tuple[float, float]]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples (t_k, x(t_k), y(t_k)); ``states[k]`` is the concatenation (x, y)."""

    times: np.ndarray
    states: np.ndarray
    h: float
    order: int = 4

    @property
    def dim(self) -> int:
        return self.states.shape[1] // 2

    def __len__(self) -> int:
        return len(self.times)

    def point(self, k: int) -> Point:
        return Point.from_coordinates(self.states[k])

    def points(self) -> Iterator[tuple[float, Point]]:
        for k, t in enumerate(self.times):
            yield float(t), self.point(k)

    @property
    def final_point(self) -> Point:
        return self.point(-1)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True, eq=False)
class TransportedVector:
    """A vertical field X(t) on the grid of its trajectory."""

    times: np.ndarray
    values: np.ndarray

    def norms(self, g: GLMetricField, traj: Trajectory) -> np.ndarray:
        return transported_norms(g, self, traj)

    def max_drift(self, g: GLMetricField, traj: Trajectory) -> float:
        """max_t |g(X, X)(t) - g(X, X)(0)|."""
        norms = self.norms(g, traj)
        return float(np.max(np.abs(norms - norms[0])))


@dataclass(frozen=True, eq=False)
class EnergyReport:
    times: np.ndarray
    energies: np.ndarray

    @property
    def max_drift(self) -> float:
        return float(np.max(np.abs(self.energies - self.energies[0])))


def _rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, s: np.ndarray, h: float):
    k1 = f(t, s)
    k2 = f(t + 0.5 * h, s + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, s + 0.5 * h * k2)
    k4 = f(t + h, s + h * k3)
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _spray_rate(G: Semispray) -> Callable[[float, np.ndarray], np.ndarray]:
    n = G.dim

    def rate(t: float, s: np.ndarray) -> np.ndarray:
        return np.concatenate([s[n:], -2.0 * G.coefficients(Point.from_coordinates(s))])

    return rate


def _guard(state: np.ndarray, n: int, box: Box | None, max_speed: float) -> str | None:
    if not np.all(np.isfinite(state)):
        return "non-finite state"
    speed = float(np.linalg.norm(state[n:]))
    if speed > max_speed:
        return f"speed {speed:.3e} exceeds {max_speed:.3e}"
    if box is not None:
        for i, (lo, hi) in enumerate(box):
            if not lo <= state[i] <= hi:
                return f"x{i + 1} = {state[i]:.6g} left [{lo:g}, {hi:g}]"
    return None


def integrate_sode(
    G: Semispray,
    u0: Point,
    h: float,
    steps: int,
    box: Box | None = None,
    max_speed: float = DEFAULT_MAX_SPEED,
) -> Trajectory:
    """Integrate d2x/dt2 + 2G(x, dx/dt) = 0 from u0 with RK4.

    ``box`` bounds the positions x only. Leaving it, a non-finite state or
    |y| > max_speed raises BlowUpError; a domain or singular failure raises
    IntegrationError. Both carry the samples so far.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    if steps < 1:
        raise ValueError(f"need at least one step, got {steps}")
    if u0.dim != G.dim:
        raise DimensionMismatchError(
            f"start point of dimension {u0.dim} for semispray of dimension {G.dim}"
        )
    if box is not None and len(box) != G.dim:
        raise DimensionMismatchError(f"box has {len(box)} intervals for dimension {G.dim}")
    n = G.dim
    rate = _spray_rate(G)
    states = [np.array(u0.z)]
    times = [0.0]
    for k in range(1, steps + 1):
        try:
            state = _rk4_step(rate, times[-1], states[-1], h)
        except (DomainError, SingularMetricError) as err:
            message = f"evaluation failed after t = {times[-1]:.6g}: {err}"
            partial = Trajectory(np.array(times), np.array(states), h)
            raise IntegrationError(message, times[-1], partial) from err
        reason = _guard(state, n, box, max_speed)
        if reason is not None:
            logger.info("blow-up guard at t = %.6g: %s", k * h, reason)
            raise BlowUpError(
                f"integration aborted at t = {k * h:.6g}: {reason}",
                times[-1],
                Trajectory(np.array(times), np.array(states), h),
                reason,
            )
        states.append(state)
        times.append(k * h)
    return Trajectory(np.array(times), np.array(states), h)


def _orbit_interpolant(G: Semispray, traj: Trajectory) -> CubicHermiteSpline:
    rate = _spray_rate(G)
    slopes = np.array([rate(t, s) for t, s in zip(traj.times, traj.states, strict=True)])
    return CubicHermiteSpline(traj.times, traj.states, slopes, axis=0)


def parallel_transport(
    G: Semispray,
    N: ConnectionField | ConnectionValue | np.ndarray,
    traj: Trajectory,
    X0: Sequence[float],
) -> TransportedVector:
    """Solve dX^i/dt = -N^i_j(x(t), y(t)) X^j on the trajectory grid.

    Half-step states come from the cubic Hermite interpolant of the stored
    samples and their exact slopes (y, -2G).
    """
    X = np.asarray(X0, dtype=float)
    if X.shape != (traj.dim,):
        raise DimensionMismatchError(f"vector of shape {X.shape} for dimension {traj.dim}")
    if len(traj) == 1:
        return TransportedVector(traj.times.copy(), X[None, :])
    orbit = _orbit_interpolant(G, traj)
    times = traj.times

    def rate(t: float, v: np.ndarray) -> np.ndarray:
        k = int(np.searchsorted(times, t))
        state = traj.states[k] if k < len(times) and times[k] == t else orbit(t)
        return -connection_at(N, Point.from_coordinates(state)) @ v

    values = [X]
    try:
        for k in range(len(times) - 1):
            dt = float(times[k + 1] - times[k])
            values.append(_rk4_step(rate, float(times[k]), values[-1], dt))
    except (DomainError, SingularMetricError) as err:
        message = f"transport failed after t = {times[k]:.6g}: {err}"
        raise IntegrationError(message, float(times[k])) from err
    return TransportedVector(times.copy(), np.array(values))


def transported_norms(
    g: GLMetricField, transported: TransportedVector, traj: Trajectory
) -> np.ndarray:
    """g_ij(x(t), y(t)) X^i X^j at every sample."""
    if len(transported.times) != len(traj):
        raise DimensionMismatchError("transported vector and trajectory use different grids")
    return np.array(
        [X @ g.values(u) @ X for X, (_, u) in zip(transported.values, traj.points(), strict=True)]
    )


def conservation_report(Lsp: LagrangeSpace, traj: Trajectory) -> EnergyReport:
    """E_L at every sample of the trajectory."""
    energies = np.array([energy(Lsp, u) for _, u in traj.points()])
    return EnergyReport(traj.times.copy(), energies)
