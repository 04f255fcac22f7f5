"""Lagrange spaces: the metric, canonic semispray and symplectic structure of a regular L."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from spray_geometry.calculus import Jet, jet
from spray_geometry.config import DEFAULT_SINGULAR_DET
from spray_geometry.errors import DegenerateLagrangianError
from spray_geometry.expr import Point, ScalarExpression
from spray_geometry.geometry.connections import (
    compatible_connection,
    family_member,
)
from spray_geometry.geometry.fields import (
    ConnectionField,
    ConnectionValue,
    GLMetricField,
    MetricValue,
    Tensor11,
    connection_at,
    factor_metric,
)

logger = logging.getLogger(__name__)


def _blocks(j: Jet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(dL/dx, dL/dy, [k, h] = d2L/dy^k dx^h) from a jet of L."""
    n = j.dim
    return j.x_grad(), j.y_grad(), j.hess[n:, :n]


@dataclass(frozen=True, eq=False)
class LagrangeSpace:
    """A Lagrangian L(x, y) with everything derived from it computed on demand."""

    lagrangian: ScalarExpression
    singular_det: float = DEFAULT_SINGULAR_DET

    @classmethod
    def parse(
        cls, text: str, dim: int, singular_det: float = DEFAULT_SINGULAR_DET
    ) -> "LagrangeSpace":
        return cls(ScalarExpression.parse(text, dim), singular_det)

    @property
    def dim(self) -> int:
        return self.lagrangian.dim

    @cached_property
    def metric_field(self) -> GLMetricField:
        return GLMetricField.from_lagrangian(self.lagrangian)

    @cached_property
    def semispray(self) -> "CanonicSemispray":
        return CanonicSemispray(self)

    def jet(self, u: Point, order: int = 2) -> Jet:
        return jet(self.lagrangian, u, order)

    def metric_from_jet(self, j: Jet) -> MetricValue:
        n = self.dim
        try:
            return factor_metric(
                0.5 * j.hess[n:, n:], self.singular_det, error=DegenerateLagrangianError
            )
        except DegenerateLagrangianError:
            logger.debug("degenerate Lagrangian at %s", j.point)
            raise

    def metric_at(self, u: Point) -> MetricValue:
        """g at u; raises DegenerateLagrangianError when |det g| <= singular_det."""
        return self.metric_from_jet(self.jet(u, 2))


@dataclass(frozen=True, eq=False)
class CanonicSemispray:
    """G^i = (1/4) g^{ik} (d2L/dy^k dx^h y^h - dL/dx^k) of a Lagrange space.

    ``y_jacobian`` is exact: it differentiates this formula with the order-3
    jet of L instead of building G symbolically.
    """

    space: LagrangeSpace

    @property
    def dim(self) -> int:
        return self.space.dim

    def _coefficients(self, j: Jet, metric: MetricValue) -> np.ndarray:
        Lx, _, Lyx = _blocks(j)
        return 0.25 * metric.inverse @ (Lyx @ j.point.fiber() - Lx)

    def coefficients(self, u: Point) -> np.ndarray:
        j = self.space.jet(u, 2)
        return self._coefficients(j, self.space.metric_from_jet(j))

    def y_jacobian(self, u: Point) -> np.ndarray:
        """[i, j] = dG^i/dy^j."""
        n = self.dim
        j = self.space.jet(u, 3)
        metric = self.space.metric_from_jet(j)
        G = self._coefficients(j, metric)
        y = u.fiber()
        Lyx = j.hess[n:, :n]
        Lxy = j.hess[:n, n:]
        # d/dy^j of (d2L/dy^k dx^h y^h - dL/dx^k)
        db = np.einsum("khj,h->kj", j.third[n:, :n, n:], y) + Lyx - Lxy
        # dg_ab/dy^j
        dg = 0.5 * j.third[n:, n:, n:]
        return metric.inverse @ (0.25 * db - np.einsum("abj,b->aj", dg, G))


def lagrange_metric(Lsp: LagrangeSpace, u: Point) -> np.ndarray:
    """g_ij = (1/2) d2L/dy^i dy^j at u, regularity checked."""
    return Lsp.metric_at(u).matrix


def canonic_semispray(Lsp: LagrangeSpace, u: Point) -> np.ndarray:
    return Lsp.semispray.coefficients(u)


def energy(Lsp: LagrangeSpace, u: Point) -> float:
    """E_L = y^i dL/dy^i - L."""
    j = Lsp.jet(u, 1)
    return float(np.dot(u.fiber(), j.y_grad()) - j.value)


def canonic_connection(Lsp: LagrangeSpace, u: Point) -> ConnectionValue:
    """N^i_j = dG^i/dy^j of the canonic semispray."""
    metric = Lsp.metric_at(u)
    return ConnectionValue(u, Lsp.semispray.y_jacobian(u), metric.matrix)


def _skew_mixed(j: Jet) -> np.ndarray:
    _, _, Lyx = _blocks(j)
    return 0.5 * (Lyx - Lyx.T)


def unique_connection(Lsp: LagrangeSpace, u: Point) -> ConnectionValue:
    """The connection fixed by metricity and a Lagrangian horizontal subbundle.

    N^i_j = (1/2) g^{ik} [S(g_kj) + (1/2)(d2L/dy^k dx^j - d2L/dx^k dy^j)]
    """
    j = Lsp.jet(u, 2)
    Lsp.metric_from_jet(j)
    return compatible_connection(
        Lsp.semispray, Lsp.metric_field, _skew_mixed(j), u, threshold=Lsp.singular_det
    )


def symplectic_adapted(
    Lsp: LagrangeSpace, N: ConnectionValue | ConnectionField | np.ndarray, u: Point
) -> tuple[np.ndarray, np.ndarray]:
    """Cartan form in the adapted cobasis {dx, delta y} of N.

    Returns (g, hh) with w = g_ij delta y^j ^ dx^i + hh_ij dx^j ^ dx^i and
    hh = -N_[ij] + (1/4)(d2L/dy^i dx^j - d2L/dx^i dy^j). hh vanishes iff the
    horizontal subbundle of N is Lagrangian.
    """
    j = Lsp.jet(u, 2)
    g = Lsp.metric_from_jet(j).matrix
    lowered = g @ connection_at(N, u)
    skew = 0.5 * (lowered - lowered.T)
    return g, -skew + 0.5 * _skew_mixed(j)


def lagrange_family_member(
    Lsp: LagrangeSpace, X: Tensor11 | np.ndarray, u: Point
) -> ConnectionValue:
    """Metric connections of a Lagrange space: N^c + O X with N^c canonic."""
    return family_member(
        canonic_connection(Lsp, u), X, Lsp.metric_field, u, threshold=Lsp.singular_det
    )


def cartan_form(Lsp: LagrangeSpace, u: Point) -> np.ndarray:
    """w = (1/2) d(dL/dy^i dx^i) as a 2n x 2n matrix on the natural frame (d/dx, d/dy).

    With A_ij = (1/2) d2L/dy^i dx^j the matrix is [[A^T - A, -g], [g, 0]].
    """
    n = Lsp.dim
    j = Lsp.jet(u, 2)
    g = Lsp.metric_from_jet(j).matrix
    A = 0.5 * _blocks(j)[2]
    omega = np.zeros((2 * n, 2 * n))
    omega[:n, :n] = A.T - A
    omega[:n, n:] = -g
    omega[n:, :n] = g
    return omega


def euler_lagrange_residual(Lsp: LagrangeSpace, u: Point) -> np.ndarray:
    """dL/dx^i - d/dt dL/dy^i along the curve through u with acceleration -2G."""
    j = Lsp.jet(u, 2)
    Lx, _, Lyx = _blocks(j)
    n = Lsp.dim
    acceleration = -2.0 * Lsp.semispray.coefficients(u)
    return Lx - Lyx @ u.fiber() - j.hess[n:, n:] @ acceleration


def energy_form_residual(Lsp: LagrangeSpace, u: Point) -> np.ndarray:
    """i_S w + (1/2) dE_L on the natural frame; zero for the canonic semispray."""
    n = Lsp.dim
    j = Lsp.jet(u, 2)
    Lx, _, Lyx = _blocks(j)
    y = u.fiber()
    S = np.concatenate([y, -2.0 * Lsp.semispray.coefficients(u)])
    dE = np.concatenate([y @ Lyx - Lx, j.hess[n:, n:] @ y])
    return S @ cartan_form(Lsp, u) + 0.5 * dE
