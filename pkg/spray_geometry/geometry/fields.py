"""Field types of the tangent-bundle geometry: metrics, semisprays, connections."""

from __future__ import annotations

import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Protocol

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from spray_geometry.calculus import jet
from spray_geometry.config import DEFAULT_SINGULAR_DET
from spray_geometry.errors import DimensionMismatchError, SingularMetricError
from spray_geometry.expr import Point, ScalarExpression
from spray_geometry.expr.nodes import const, mul

ConnectionField = Callable[[Point], np.ndarray]


def _check_dim(expected: int, u: Point):
    if u.dim != expected:
        raise DimensionMismatchError(
            f"point of dimension {u.dim} for field of dimension {expected}"
        )


# ---------------------------------------------------------------------------
# Metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricValue:
    """g at a point with its LU-based inverse and determinant."""

    matrix: np.ndarray
    inverse: np.ndarray
    determinant: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def factor_metric(
    matrix: np.ndarray,
    threshold: float = DEFAULT_SINGULAR_DET,
    error: type[SingularMetricError] = SingularMetricError,
) -> MetricValue:
    """Invert a symmetric matrix by LU with partial pivoting.

    |det| <= threshold raises ``error``; nothing is regularised.
    """
    matrix = np.asarray(matrix, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    determinant = float((-1) ** swaps * np.prod(np.diag(lu)))
    if not abs(determinant) > threshold:
        raise error(f"metric is singular (|det| = {abs(determinant):.3e})", determinant)
    inverse = lu_solve((lu, piv), np.eye(len(matrix)))
    return MetricValue(matrix, 0.5 * (inverse + inverse.T), determinant)


@dataclass(frozen=True, eq=False)
class GLMetricField:
    """Symmetric matrix of expressions g_ij(x, y); entry [j][i] is entry [i][j]."""

    entries: tuple[tuple[ScalarExpression, ...], ...]

    def __post_init__(self):
        n = len(self.entries)
        if n == 0 or any(len(row) != n for row in self.entries):
            raise DimensionMismatchError("metric entries must form a square matrix")
        for i in range(n):
            for j in range(i):
                if self.entries[i][j] is not self.entries[j][i]:
                    raise ValueError("metric entries must be shared across the diagonal")

    @classmethod
    def from_upper(
        cls, upper: dict[tuple[int, int], ScalarExpression], dim: int
    ) -> "GLMetricField":
        """Build from the upper triangle, keys (i, j) with 0 <= i <= j < dim."""
        rows = [[None] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i, dim):
                if (i, j) not in upper:
                    raise ValueError(f"missing metric entry g{i + 1}{j + 1}")
                rows[i][j] = rows[j][i] = upper[(i, j)]
        return cls(tuple(tuple(row) for row in rows))

    @classmethod
    def from_texts(cls, upper: dict[tuple[int, int], str], dim: int) -> "GLMetricField":
        return cls.from_upper(
            {key: ScalarExpression.parse(text, dim) for key, text in upper.items()}, dim
        )

    @classmethod
    def euclidean(cls, dim: int) -> "GLMetricField":
        one = ScalarExpression.constant(1.0, dim)
        zero = ScalarExpression.constant(0.0, dim)
        return cls.from_upper(
            {(i, j): one if i == j else zero for i in range(dim) for j in range(i, dim)}, dim
        )

    @classmethod
    def from_lagrangian(cls, lagrangian: ScalarExpression) -> "GLMetricField":
        """g_ij = (1/2) d^2 L / dy^i dy^j, built symbolically."""
        n = lagrangian.dim
        upper = {}
        for i in range(n):
            for j in range(i, n):
                second = lagrangian.partial((n + i, n + j))
                upper[(i, j)] = ScalarExpression(mul(const(0.5), second.node), n)
        return cls.from_upper(upper, n)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def values(self, u: Point) -> np.ndarray:
        _check_dim(self.dim, u)
        n = self.dim
        g = np.empty((n, n))
        z = u.z
        for i in range(n):
            for j in range(i, n):
                g[i, j] = g[j, i] = self.entries[i][j].evaluate_at(z)
        return g

    def at(self, u: Point, threshold: float = DEFAULT_SINGULAR_DET) -> MetricValue:
        return factor_metric(self.values(u), threshold)


# ---------------------------------------------------------------------------
# Semisprays
# ---------------------------------------------------------------------------

class Semispray(Protocol):
    """Anything that yields G^i(u) and dG^i/dy^j(u)."""

    @property
    def dim(self) -> int: ...

    def coefficients(self, u: Point) -> np.ndarray: ...

    def y_jacobian(self, u: Point) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class SemisprayField:
    """Semispray S = y^i d/dx^i - 2 G^i d/dy^i given by expressions G^i."""

    components: tuple[ScalarExpression, ...]

    def __post_init__(self):
        if not self.components:
            raise DimensionMismatchError("a semispray needs at least one coefficient")
        if any(c.dim != len(self.components) for c in self.components):
            raise DimensionMismatchError("semispray coefficients must match the dimension")

    @classmethod
    def from_texts(cls, texts: Sequence[str]) -> "SemisprayField":
        dim = len(texts)
        return cls(tuple(ScalarExpression.parse(text, dim) for text in texts))

    @classmethod
    def zero(cls, dim: int) -> "SemisprayField":
        return cls(tuple(ScalarExpression.constant(0.0, dim) for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.components)

    def coefficients(self, u: Point) -> np.ndarray:
        _check_dim(self.dim, u)
        z = u.z
        return np.array([c.evaluate_at(z) for c in self.components])

    def y_jacobian(self, u: Point) -> np.ndarray:
        """[s, k] = dG^s / dy^k."""
        _check_dim(self.dim, u)
        n = self.dim
        return np.array([jet(c, u, 1).y_grad() for c in self.components]).reshape(n, n)


# ---------------------------------------------------------------------------
# Connections and (1,1)-tensors
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConnectionValue:
    """Coefficients N^i_j at a point, with the lowered split when a metric is attached.

    ``lowered`` is N_ij = g_ik N^k_j; ``sym`` and ``skew`` are its symmetric
    and skew-symmetric parts.
    """

    point: Point
    matrix: np.ndarray
    metric: np.ndarray | None = None

    def with_metric(self, metric: np.ndarray | MetricValue) -> "ConnectionValue":
        if isinstance(metric, MetricValue):
            metric = metric.matrix
        return ConnectionValue(self.point, self.matrix, np.asarray(metric, dtype=float))

    @cached_property
    def lowered(self) -> np.ndarray:
        if self.metric is None:
            raise ValueError("connection has no metric attached; use with_metric()")
        return self.metric @ self.matrix

    @cached_property
    def sym(self) -> np.ndarray:
        return 0.5 * (self.lowered + self.lowered.T)

    @cached_property
    def skew(self) -> np.ndarray:
        return 0.5 * (self.lowered - self.lowered.T)


def connection_at(N: ConnectionField | ConnectionValue | np.ndarray, u: Point) -> np.ndarray:
    """Coefficient matrix of N at u, whether N is a field, a value or a plain matrix."""
    if isinstance(N, ConnectionValue):
        return N.matrix
    if callable(N):
        return np.asarray(N(u), dtype=float)
    return np.asarray(N, dtype=float)


@dataclass(frozen=True, eq=False)
class Tensor11:
    """A (1,1) d-tensor X^m_k, stored with row m and column k.

    Either constant or a matrix of expressions.
    """

    constant: np.ndarray | None = None
    entries: tuple[tuple[ScalarExpression, ...], ...] | None = None

    def __post_init__(self):
        if (self.constant is None) == (self.entries is None):
            raise ValueError("give exactly one of constant or entries")

    @classmethod
    def from_matrix(cls, matrix) -> "Tensor11":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"tensor must be square, got shape {matrix.shape}")
        return cls(constant=matrix)

    @classmethod
    def from_texts(cls, rows: Sequence[Sequence[str]], dim: int) -> "Tensor11":
        if len(rows) != dim or any(len(row) != dim for row in rows):
            raise DimensionMismatchError(f"tensor must be {dim}x{dim}")
        return cls(
            entries=tuple(tuple(ScalarExpression.parse(text, dim) for text in row) for row in rows)
        )

    @classmethod
    def zero(cls, dim: int) -> "Tensor11":
        return cls.from_matrix(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return len(self.constant) if self.constant is not None else len(self.entries)

    def at(self, u: Point) -> np.ndarray:
        _check_dim(self.dim, u)
        if self.constant is not None:
            return self.constant
        z = u.z
        return np.array([[e.evaluate_at(z) for e in row] for row in self.entries])
