"""Problem definitions: TOML files naming a metric and semispray or a Lagrangian.

A definition has these tables (see ``problems/`` for complete files)::

    [problem]      dim = 2, mode = "lagrangian" | "generalized", lagrangian = "..."
    [metric]       g11 = "...", g12 = "...", ...   (generalized, upper triangle)
    [semispray]    G1 = "...", G2 = "..."          (generalized)
    [domain]       x1 = [lo, hi], ..., y2 = [lo, hi]
    [sampling]     samples = 20, seed = 0, points = [[x1, x2, y1, y2], ...]
    [tolerances]   algebraic = 1e-12, derived = 1e-9
"""

from __future__ import annotations

import logging
import tomllib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from spray_geometry.config import DEFAULT_SINGULAR_DET, Settings, Tolerances
from spray_geometry.errors import ConfigError, ExpressionError, ProblemError
from spray_geometry.expr import Point, ScalarExpression, slot_name
from spray_geometry.geometry import GLMetricField, LagrangeSpace, Semispray, SemisprayField

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 20
DEFAULT_SEED = 0


class Mode(Enum):
    LAGRANGIAN = "lagrangian"
    GENERALIZED = "generalized"


@dataclass(frozen=True, eq=False)
class ProblemDefinition:
    dim: int
    mode: Mode
    metric: GLMetricField
    semispray: Semispray
    domain: tuple[tuple[float, float], ...]
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    points: tuple[Point, ...] = ()
    tolerances: dict[str, float] | None = None
    lagrangian: LagrangeSpace | None = None
    source: str = "<string>"
    singular_det: float = DEFAULT_SINGULAR_DET

    @property
    def position_box(self) -> tuple[tuple[float, float], ...]:
        return self.domain[: self.dim]

    def resolve_tolerances(
        self,
        settings: Settings,
        algebraic: float | None = None,
        derived: float | None = None,
    ) -> Tolerances:
        """Flag over [tolerances] table over environment."""
        base = settings.tolerances.override(**(self.tolerances or {}))
        return base.override(algebraic=algebraic, derived=derived)


def _table(data: dict[str, Any], name: str, required: bool = True) -> dict[str, Any]:
    table = data.get(name)
    if table is None:
        if required:
            raise ProblemError(f"missing [{name}] table")
        return {}
    if not isinstance(table, dict):
        raise ProblemError(f"[{name}] must be a table")
    return table


def _expression(text: Any, dim: int, where: str) -> ScalarExpression:
    if isinstance(text, int | float) and not isinstance(text, bool):
        text = repr(float(text))
    if not isinstance(text, str):
        raise ProblemError(f"{where} must be an expression string")
    try:
        return ScalarExpression.parse(text, dim)
    except ExpressionError as err:
        caret = err.caret()
        raise ProblemError(f"{where}: {err}" + (f"\n{caret}" if caret else "")) from err


def _interval(value: Any, where: str) -> tuple[float, float]:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, int | float) and not isinstance(v, bool) for v in value)
    ):
        raise ProblemError(f"{where} must be a pair [lo, hi]")
    lo, hi = float(value[0]), float(value[1])
    if not lo < hi:
        raise ProblemError(f"{where} is degenerate: [{lo:g}, {hi:g}]")
    return lo, hi


def _positive_int(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ProblemError(f"{where} must be a positive integer")
    return value


def parse_point(values: Any, dim: int, where: str = "point") -> Point:
    """A point from 2n numbers x1..xn, y1..yn, as a list or a comma-separated string."""
    if isinstance(values, str):
        try:
            values = [float(v) for v in values.split(",")]
        except ValueError as err:
            raise ProblemError(f"{where}: expected comma-separated numbers") from err
    if not isinstance(values, list | tuple) or len(values) != 2 * dim:
        raise ProblemError(f"{where} needs {2 * dim} coordinates (x1..x{dim}, y1..y{dim})")
    try:
        return Point.from_coordinates(float(v) for v in values)
    except (TypeError, ValueError) as err:
        raise ProblemError(f"{where}: {err}") from err


def _metric(table: dict[str, Any], dim: int) -> GLMetricField:
    upper = {}
    for i in range(dim):
        for j in range(i, dim):
            key = f"g{i + 1}{j + 1}"
            if key not in table:
                raise ProblemError(f"[metric] is missing {key}")
            upper[(i, j)] = _expression(table[key], dim, f"[metric] {key}")
    extra = set(table) - {f"g{i + 1}{j + 1}" for i in range(dim) for j in range(i, dim)}
    if extra:
        raise ProblemError(f"[metric] has unexpected keys {sorted(extra)}; give the upper triangle")
    return GLMetricField.from_upper(upper, dim)


def _semispray(table: dict[str, Any], dim: int) -> SemisprayField:
    keys = [f"G{i + 1}" for i in range(dim)]
    missing = [k for k in keys if k not in table]
    if missing:
        raise ProblemError(f"[semispray] is missing {', '.join(missing)}")
    extra = set(table) - set(keys)
    if extra:
        raise ProblemError(f"[semispray] has unexpected keys {sorted(extra)}")
    return SemisprayField(tuple(_expression(table[k], dim, f"[semispray] {k}") for k in keys))


def parse_problem(
    data: dict[str, Any], source: str = "<string>", settings: Settings | None = None
) -> ProblemDefinition:
    """Validate a decoded definition; ``settings`` supplies the singular-metric threshold."""
    singular_det = (settings or Settings()).singular_det
    header = _table(data, "problem")
    dim = _positive_int(header.get("dim"), "[problem] dim")
    try:
        mode = Mode(header.get("mode"))
    except ValueError as err:
        raise ProblemError("[problem] mode must be 'lagrangian' or 'generalized'") from err

    lagrangian = None
    if mode is Mode.LAGRANGIAN:
        for name in ("metric", "semispray"):
            if name in data:
                raise ProblemError(f"[{name}] is not used in lagrangian mode")
        if "lagrangian" not in header:
            raise ProblemError("[problem] lagrangian is required in lagrangian mode")
        expression = _expression(header["lagrangian"], dim, "[problem] lagrangian")
        lagrangian = LagrangeSpace(expression, singular_det)
        metric, semispray = lagrangian.metric_field, lagrangian.semispray
    else:
        if "lagrangian" in header:
            raise ProblemError("[problem] lagrangian is not used in generalized mode")
        metric = _metric(_table(data, "metric"), dim)
        semispray = _semispray(_table(data, "semispray"), dim)

    domain_table = _table(data, "domain")
    names = [slot_name(s, dim) for s in range(2 * dim)]
    missing = [name for name in names if name not in domain_table]
    if missing:
        raise ProblemError(f"[domain] is missing {', '.join(missing)}")
    domain = tuple(_interval(domain_table[name], f"[domain] {name}") for name in names)

    sampling = _table(data, "sampling", required=False)
    samples = _positive_int(sampling.get("samples", DEFAULT_SAMPLES), "[sampling] samples")
    seed = sampling.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ProblemError("[sampling] seed must be a non-negative integer")
    points = tuple(
        parse_point(p, dim, f"[sampling] points[{k}]")
        for k, p in enumerate(sampling.get("points", []))
    )

    tolerances = None
    if "tolerances" in data:
        table = _table(data, "tolerances")
        extra = set(table) - {"algebraic", "derived"}
        if extra:
            raise ProblemError(f"[tolerances] has unexpected keys {sorted(extra)}")
        try:
            tolerances = {k: float(v) for k, v in table.items()}
            Tolerances().override(**tolerances)
        except (TypeError, ValueError, ConfigError) as err:
            raise ProblemError(f"[tolerances]: {err}") from err

    problem = ProblemDefinition(
        dim=dim,
        mode=mode,
        metric=metric,
        semispray=semispray,
        domain=domain,
        samples=samples,
        seed=seed,
        points=points,
        tolerances=tolerances,
        lagrangian=lagrangian,
        source=source,
        singular_det=singular_det,
    )
    logger.info("loaded %s problem of dimension %d from %s", mode.value, dim, source)
    return problem


def load_problem_text(
    text: str, source: str = "<string>", settings: Settings | None = None
) -> ProblemDefinition:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ProblemError(f"{source}: {err}") from err
    return parse_problem(data, source, settings)


def load_problem(path: str | Path, settings: Settings | None = None) -> ProblemDefinition:
    path = Path(path)
    return load_problem_text(path.read_text(encoding="utf-8"), str(path), settings)


def sample_points(
    problem: ProblemDefinition, samples: int | None = None, seed: int | None = None
) -> list[Point]:
    """The definition's explicit points, else uniform draws from its domain box.

    Draws come from ``numpy.random.default_rng(seed)`` so a (definition, seed)
    pair always yields the same points.
    """
    if problem.points and samples is None:
        return list(problem.points)
    count = samples if samples is not None else problem.samples
    if count < 1:
        raise ProblemError(f"samples must be positive, got {count}")
    rng = np.random.default_rng(problem.seed if seed is None else seed)
    lo = np.array([interval[0] for interval in problem.domain])
    hi = np.array([interval[1] for interval in problem.domain])
    draws = rng.uniform(lo, hi, size=(count, 2 * problem.dim))
    return [Point.from_coordinates(row) for row in draws]
