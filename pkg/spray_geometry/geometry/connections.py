"""Metric nonlinear connections of a semispray and a generalized Lagrange metric.

Index conventions: N[i, j] = N^i_j, dG[s, k] = dG^s/dy^k, X[m, k] = X^m_k and
O[i, j, k, l] = O^{ij}_{kl}.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from spray_geometry.calculus import jet
from spray_geometry.config import DEFAULT_SINGULAR_DET
from spray_geometry.errors import DimensionMismatchError
from spray_geometry.expr import Point, ScalarExpression
from spray_geometry.geometry.fields import (
    ConnectionField,
    ConnectionValue,
    GLMetricField,
    MetricValue,
    Semispray,
    Tensor11,
    connection_at,
)


def _same_dim(*dims: int):
    if len(set(dims)) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {dims}")


def _semispray_action(coefficients: np.ndarray, f: ScalarExpression, u: Point) -> float:
    j = jet(f, u, 1)
    return float(np.dot(u.fiber(), j.x_grad()) - 2.0 * np.dot(coefficients, j.y_grad()))


def apply_semispray(G: Semispray, f: ScalarExpression, u: Point) -> float:
    """S(f) = y^i df/dx^i - 2 G^i df/dy^i at u."""
    _same_dim(G.dim, f.dim, u.dim)
    return _semispray_action(G.coefficients(u), f, u)


def metric_semispray_derivative(G: Semispray, g: GLMetricField, u: Point) -> np.ndarray:
    """The symmetric matrix S(g_ij) at u."""
    _same_dim(G.dim, g.dim, u.dim)
    coefficients = G.coefficients(u)
    n = g.dim
    result = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            result[i, j] = result[j, i] = _semispray_action(coefficients, g.entries[i][j], u)
    return result


def connection_from_semispray(
    G: Semispray, u: Point, metric: np.ndarray | MetricValue | None = None
) -> ConnectionValue:
    """The induced connection N^i_j = dG^i/dy^j."""
    _same_dim(G.dim, u.dim)
    value = ConnectionValue(u, G.y_jacobian(u))
    return value.with_metric(metric) if metric is not None else value


def induced_connection(G: Semispray) -> ConnectionField:
    return G.y_jacobian


def nabla_vertical(
    G: Semispray,
    N: ConnectionField | ConnectionValue | np.ndarray,
    X: Sequence[ScalarExpression],
    u: Point,
) -> np.ndarray:
    """Components of the dynamical covariant derivative of X^i d/dy^i: S(X^i) + X^j N^i_j."""
    _same_dim(G.dim, len(X), u.dim)
    coefficients = G.coefficients(u)
    drift = np.array([_semispray_action(coefficients, component, u) for component in X])
    values = np.array([component.evaluate(u) for component in X])
    return drift + connection_at(N, u) @ values


def _covariant_metric(sg: np.ndarray, g: np.ndarray, N: np.ndarray) -> np.ndarray:
    lowered = g @ N
    return sg - lowered - lowered.T


def nabla_metric(
    G: Semispray,
    N: ConnectionField | ConnectionValue | np.ndarray,
    g: GLMetricField,
    u: Point,
    threshold: float = DEFAULT_SINGULAR_DET,
) -> np.ndarray:
    """g_{ij|} = S(g_ij) - g_im N^m_j - g_mj N^m_i."""
    metric = g.at(u, threshold)
    sg = metric_semispray_derivative(G, g, u)
    return _covariant_metric(sg, metric.matrix, connection_at(N, u))


def helmholtz_residual(
    G: Semispray, g: GLMetricField, u: Point, threshold: float = DEFAULT_SINGULAR_DET
) -> np.ndarray:
    """S(g_ij) - g_im dG^m/dy^j - g_mj dG^m/dy^i; zero iff dG/dy is metric."""
    g_u = g.at(u, threshold).matrix
    return _covariant_metric(metric_semispray_derivative(G, g, u), g_u, G.y_jacobian(u))


# ---------------------------------------------------------------------------
# Obata operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ObataPair:
    """Obata projectors O and O* of a metric at a point.

    Both act on (1,1)-tensors by (T X)^b_c = T^{ab}_{cd} X^d_a, the
    contraction used by the family formula.
    """

    O: np.ndarray
    O_star: np.ndarray

    @property
    def dim(self) -> int:
        return self.O.shape[0]

    @staticmethod
    def identity(dim: int) -> np.ndarray:
        eye = np.eye(dim)
        return np.einsum("ik,jl->ijkl", eye, eye)

    @staticmethod
    def apply(operator: np.ndarray, X: np.ndarray) -> np.ndarray:
        return np.einsum("abcd,da->bc", operator, X)

    @staticmethod
    def compose(first: np.ndarray, second: np.ndarray) -> np.ndarray:
        """Operator of X -> first(second(X))."""
        return np.einsum("abcd,edaf->ebcf", first, second)


def obata_from_metric(metric: MetricValue) -> ObataPair:
    identity = ObataPair.identity(metric.dim)
    trace_part = np.einsum("ij,kl->ijkl", metric.inverse, metric.matrix)
    return ObataPair(0.5 * (identity - trace_part), 0.5 * (identity + trace_part))


def obata_operators(
    g: GLMetricField, u: Point, threshold: float = DEFAULT_SINGULAR_DET
) -> ObataPair:
    """O = (1/2)(dd - g^{ij} g_kl) and O* = (1/2)(dd + g^{ij} g_kl) at u."""
    return obata_from_metric(g.at(u, threshold))


# ---------------------------------------------------------------------------
# The metric connection and its family
# ---------------------------------------------------------------------------

class Formulation(Enum):
    OBATA = "obata"
    COVARIANT = "covariant"
    ADJOINT = "adjoint"


def _metric_connection_matrix(
    formulation: Formulation, metric: MetricValue, sg: np.ndarray, dG: np.ndarray
) -> np.ndarray:
    g, ginv = metric.matrix, metric.inverse
    if formulation is Formulation.OBATA:
        O = obata_from_metric(metric).O
        return 0.5 * ginv @ sg + np.einsum("iksj,sk->ij", O, dG)
    if formulation is Formulation.COVARIANT:
        return 0.5 * ginv @ _covariant_metric(sg, g, dG) + dG
    if formulation is Formulation.ADJOINT:
        return 0.5 * ginv @ sg + 0.5 * (dG - ginv @ dG.T @ g)
    raise ValueError(f"unknown formulation {formulation!r}")


def metric_connection(
    G: Semispray,
    g: GLMetricField,
    u: Point,
    formulation: Formulation = Formulation.OBATA,
    threshold: float = DEFAULT_SINGULAR_DET,
) -> ConnectionValue:
    """The metric nonlinear connection N^c of (G, g):

    N^c^i_j = (1/2) g^{ik} S(g_kj) + O^{ik}_{sj} dG^s/dy^k
    """
    _same_dim(G.dim, g.dim, u.dim)
    metric = g.at(u, threshold)
    sg = metric_semispray_derivative(G, g, u)
    matrix = _metric_connection_matrix(formulation, metric, sg, G.y_jacobian(u))
    return ConnectionValue(u, matrix, metric.matrix)


def metric_connection_forms(
    G: Semispray, g: GLMetricField, u: Point, threshold: float = DEFAULT_SINGULAR_DET
) -> dict[Formulation, np.ndarray]:
    """N^c by each formulation, sharing one evaluation of S(g) and dG/dy."""
    _same_dim(G.dim, g.dim, u.dim)
    metric = g.at(u, threshold)
    sg = metric_semispray_derivative(G, g, u)
    dG = G.y_jacobian(u)
    return {f: _metric_connection_matrix(f, metric, sg, dG) for f in Formulation}


def metric_connection_field(
    G: Semispray, g: GLMetricField, threshold: float = DEFAULT_SINGULAR_DET
) -> ConnectionField:
    return lambda u: metric_connection(G, g, u, threshold=threshold).matrix


def _tensor_at(X: Tensor11 | np.ndarray, u: Point) -> np.ndarray:
    return X.at(u) if isinstance(X, Tensor11) else np.asarray(X, dtype=float)


def family_member(
    Nc: ConnectionValue,
    X: Tensor11 | np.ndarray,
    g: GLMetricField,
    u: Point,
    threshold: float = DEFAULT_SINGULAR_DET,
) -> ConnectionValue:
    """N^i_j = N^c^i_j + O^{ki}_{jm} X^m_k; metric for every X."""
    metric = g.at(u, threshold)
    x = _tensor_at(X, u)
    _same_dim(metric.dim, x.shape[0], Nc.matrix.shape[0])
    O = obata_from_metric(metric).O
    return ConnectionValue(u, Nc.matrix + np.einsum("kijm,mk->ij", O, x), metric.matrix)


def family_projector_residual(
    Nc: ConnectionValue,
    N: ConnectionValue | np.ndarray,
    g: GLMetricField,
    u: Point,
    threshold: float = DEFAULT_SINGULAR_DET,
) -> np.ndarray:
    """Lowered O*(N - N^c); zero when N - N^c lies in the image of O."""
    metric = g.at(u, threshold)
    difference = connection_at(N, u) - Nc.matrix
    return metric.matrix @ ObataPair.apply(obata_from_metric(metric).O_star, difference)


def horizontal_semispray(N: ConnectionField | ConnectionValue | np.ndarray, u: Point) -> np.ndarray:
    """G^i = (1/2) N^i_j y^j, the coefficients of the horizontal semispray y^i delta/delta x^i."""
    return 0.5 * connection_at(N, u) @ u.fiber()


def compatible_connection(
    G: Semispray,
    g: GLMetricField,
    a: Tensor11 | np.ndarray,
    u: Point,
    threshold: float = DEFAULT_SINGULAR_DET,
) -> ConnectionValue:
    """The connection that is metric and makes the horizontal subbundle Lagrangian.

    For the symplectic form g_ij dy^j ^ dx^i + (1/2) a_ij dx^j ^ dx^i (a skew)
    the unique such connection has N_(ij) = (1/2) S(g_ij) and N_[ij] = (1/2) a_ij.
    """
    metric = g.at(u, threshold)
    skew = _tensor_at(a, u)
    if not np.allclose(skew, -skew.T):
        raise ValueError("the dx^dx block of the symplectic form must be skew-symmetric")
    sg = metric_semispray_derivative(G, g, u)
    return ConnectionValue(u, 0.5 * metric.inverse @ (sg + skew), metric.matrix)
