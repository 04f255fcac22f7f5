"""Berwald frame of a nonlinear connection and the almost Hermitian structure it induces.

Matrices act on column vectors of components in the natural frame
(d/dx^1..d/dx^n, d/dy^1..d/dy^n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from spray_geometry.config import DEFAULT_SINGULAR_DET
from spray_geometry.expr import Point
from spray_geometry.geometry.fields import (
    ConnectionField,
    ConnectionValue,
    GLMetricField,
    connection_at,
)
from spray_geometry.geometry.lagrange import LagrangeSpace, cartan_form


@dataclass(frozen=True, eq=False)
class AdaptedFrameValue:
    """Change of basis to {delta/delta x^i, d/dy^i} at one point.

    Column i of ``frame`` is delta/delta x^i (i < n) or d/dy^(i-n); rows of
    ``coframe`` are dx^i and delta y^i = dy^i + N^i_j dx^j.
    """

    frame: np.ndarray
    coframe: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray
    tangent_structure: np.ndarray

    @property
    def dim(self) -> int:
        return self.frame.shape[0] // 2


def adapted_frame(N: ConnectionValue | ConnectionField | np.ndarray, u: Point) -> AdaptedFrameValue:
    matrix = connection_at(N, u)
    n = matrix.shape[0]
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return AdaptedFrameValue(
        frame=np.block([[eye, zero], [-matrix, eye]]),
        coframe=np.block([[eye, zero], [matrix, eye]]),
        horizontal=np.block([[eye, zero], [-matrix, zero]]),
        vertical=np.block([[zero, zero], [matrix, eye]]),
        tangent_structure=np.block([[zero, zero], [eye, zero]]),
    )


def almost_hermitian(
    g: GLMetricField,
    N: ConnectionValue | ConnectionField | np.ndarray,
    u: Point,
    threshold: float = DEFAULT_SINGULAR_DET,
) -> tuple[np.ndarray, np.ndarray]:
    """(F, G) in the natural frame.

    F = delta/delta x^i (x) delta y^i - d/dy^i (x) dx^i is an almost complex
    structure; G = g dx (x) dx + g delta y (x) delta y is block diagonal in the
    Berwald frame.
    """
    metric = g.at(u, threshold).matrix
    frame = adapted_frame(N, u)
    n = frame.dim
    eye = np.eye(n)
    zero = np.zeros((n, n))
    F_adapted = np.block([[zero, eye], [-eye, zero]])
    G_adapted = np.block([[metric, zero], [zero, metric]])
    F = frame.frame @ F_adapted @ frame.coframe
    Gm = frame.coframe.T @ G_adapted @ frame.coframe
    return F, 0.5 * (Gm + Gm.T)


def hermitian_residual(
    Lsp: LagrangeSpace, N: ConnectionValue | ConnectionField | np.ndarray, u: Point
) -> float:
    """max |w(e_a, e_b) - G(F e_a, e_b)| over the natural frame."""
    F, Gm = almost_hermitian(Lsp.metric_field, N, u, Lsp.singular_det)
    return float(np.max(np.abs(cartan_form(Lsp, u) - F.T @ Gm)))
