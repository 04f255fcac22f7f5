"""Pointwise check sweeps and trajectory runs behind the command line and tool server.

Each check maps (problem, point, index) to a residual max-norm.  Points fan out
over worker threads; a point whose metric is singular or whose expressions
leave their domain is recorded as skipped for that check.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from spray_geometry.config import Settings, Tolerances
from spray_geometry.errors import (
    DomainError,
    IntegrationError,
    ProblemError,
    SingularMetricError,
)
from spray_geometry.expr import Point
from spray_geometry.flows import (
    Trajectory,
    TransportedVector,
    conservation_report,
    integrate_sode,
    parallel_transport,
    transported_norms,
)
from spray_geometry.geometry import (
    ConnectionValue,
    ObataPair,
    Tensor11,
    almost_hermitian,
    canonic_connection,
    energy_form_residual,
    euler_lagrange_residual,
    family_member,
    family_projector_residual,
    helmholtz_residual,
    hermitian_residual,
    induced_connection,
    lagrange_family_member,
    metric_connection,
    metric_connection_field,
    metric_connection_forms,
    metric_semispray_derivative,
    nabla_metric,
    obata_operators,
    symplectic_adapted,
    unique_connection,
)
from spray_geometry.problem import Mode, ProblemDefinition
from spray_geometry.report import CheckRecord, ConnectionRecord, Report

logger = logging.getLogger(__name__)

ENERGY_SMOKE_STEP = 1e-3
ENERGY_SMOKE_STEPS = 20

PointErrors = (SingularMetricError, DomainError, IntegrationError)


def _max_abs(*arrays) -> float:
    return float(max(np.max(np.abs(np.asarray(a))) for a in arrays))


def point_connection(problem: ProblemDefinition, u: Point):
    """N^c of a generalized problem or the canonic connection of a Lagrangian one."""
    if problem.lagrangian is not None:
        return canonic_connection(problem.lagrangian, u)
    return metric_connection(
        problem.semispray, problem.metric, u, threshold=problem.singular_det
    )


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def _metricity(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    G, g, threshold = problem.semispray, problem.metric, problem.singular_det
    N = metric_connection(G, g, u, threshold=threshold)
    return _max_abs(nabla_metric(G, N, g, u, threshold))


def random_tensor(dim: int, seed: int, index: int) -> np.ndarray:
    """The deformation tensor used by the family check at point ``index``."""
    return np.random.default_rng([seed, index]).normal(size=(dim, dim))


def _family_residual(
    problem: ProblemDefinition, u: Point, Nc: ConnectionValue, X: Tensor11 | np.ndarray
) -> float:
    G, g, threshold = problem.semispray, problem.metric, problem.singular_det
    N = family_member(Nc, X, g, u, threshold)
    return _max_abs(
        nabla_metric(G, N, g, u, threshold),
        family_projector_residual(Nc, N, g, u, threshold),
    )


def _family(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    Nc = metric_connection(
        problem.semispray, problem.metric, u, threshold=problem.singular_det
    )
    return _family_residual(problem, u, Nc, random_tensor(problem.dim, seed, index))


def _helmholtz(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    return _max_abs(
        helmholtz_residual(problem.semispray, problem.metric, u, problem.singular_det)
    )


def _equivalence(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    forms = metric_connection_forms(problem.semispray, problem.metric, u, problem.singular_det)
    forms = list(forms.values())
    return max(_max_abs(a - b) for k, a in enumerate(forms) for b in forms[k + 1 :])


def _obata_projectors(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    pair = obata_operators(problem.metric, u, problem.singular_det)
    O, O_star = pair.O, pair.O_star
    return _max_abs(
        O + O_star - ObataPair.identity(problem.dim),
        ObataPair.compose(O, O) - O,
        ObataPair.compose(O_star, O_star) - O_star,
        ObataPair.compose(O, O_star),
    )


def _uniqueness(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    Lsp = problem.lagrangian
    return _max_abs(unique_connection(Lsp, u).matrix - canonic_connection(Lsp, u).matrix)


def _decomposition(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    Lsp = problem.lagrangian
    N = canonic_connection(Lsp, u)
    sg = metric_semispray_derivative(Lsp.semispray, Lsp.metric_field, u)
    n = problem.dim
    Lyx = Lsp.jet(u, 2).hess[n:, :n]
    return _max_abs(2.0 * N.sym - sg, N.skew - 0.25 * (Lyx - Lyx.T))


def _symplectic(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    Lsp = problem.lagrangian
    _, hh = symplectic_adapted(Lsp, canonic_connection(Lsp, u), u)
    return _max_abs(hh)


def _complex_structure(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    F, _ = almost_hermitian(
        problem.metric, point_connection(problem, u), u, problem.singular_det
    )
    return _max_abs(F @ F + np.eye(2 * problem.dim))


def _hermitian(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    Lsp = problem.lagrangian
    return hermitian_residual(Lsp, canonic_connection(Lsp, u), u)


def _energy(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    traj = integrate_sode(problem.semispray, u, ENERGY_SMOKE_STEP, ENERGY_SMOKE_STEPS)
    return conservation_report(problem.lagrangian, traj).max_drift


def _euler_lagrange(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    return _max_abs(euler_lagrange_residual(problem.lagrangian, u))


def _cartan_energy(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
    return _max_abs(energy_form_residual(problem.lagrangian, u))


CheckFunction = Callable[[ProblemDefinition, Point, int, int], float]


@dataclass(frozen=True)
class Check:
    name: str
    function: CheckFunction
    algebraic: bool = False

    def tolerance(self, tolerances: Tolerances) -> float:
        return tolerances.algebraic if self.algebraic else tolerances.derived


COMPLEX_STRUCTURE = Check("complex-structure", _complex_structure, algebraic=True)
HERMITIAN = Check("hermitian", _hermitian)

GENERALIZED_CHECKS = (
    Check("metricity", _metricity),
    Check("family", _family),
    Check("helmholtz", _helmholtz),
    Check("equivalence", _equivalence, algebraic=True),
    Check("obata-projectors", _obata_projectors, algebraic=True),
)

LAGRANGIAN_CHECKS = GENERALIZED_CHECKS + (
    Check("uniqueness", _uniqueness),
    Check("decomposition", _decomposition),
    Check("symplectic", _symplectic),
    HERMITIAN,
    Check("energy", _energy),
    Check("euler-lagrange", _euler_lagrange),
    Check("cartan-energy", _cartan_energy),
)


def checks_for(problem: ProblemDefinition, command: str = "check") -> tuple[Check, ...]:
    lagrangian = problem.mode is Mode.LAGRANGIAN
    if command == "hermitian":
        return (COMPLEX_STRUCTURE, HERMITIAN) if lagrangian else (COMPLEX_STRUCTURE,)
    return LAGRANGIAN_CHECKS if lagrangian else GENERALIZED_CHECKS


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepOptions:
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    workers: int = 4
    informational: frozenset[str] = frozenset()


def _evaluate_point(
    problem: ProblemDefinition,
    checks: Sequence[Check],
    u: Point,
    index: int,
    options: SweepOptions,
) -> list[CheckRecord]:
    records = []
    for check in checks:
        tolerance = check.tolerance(options.tolerances)
        try:
            residual = check.function(problem, u, index, options.seed)
        except PointErrors as err:
            logger.info("point %d skipped for %s: %s", index, check.name, err)
            records.append(CheckRecord(check.name, index, u, None, tolerance, str(err)))
            continue
        if not np.isfinite(residual):
            residual = float("inf")
        records.append(CheckRecord(check.name, index, u, residual, tolerance))
    return records


async def _fan_out(function, items: Sequence, workers: int) -> list:
    semaphore = asyncio.Semaphore(max(1, workers))

    async def run(item):
        async with semaphore:
            return await asyncio.to_thread(function, *item)

    return await asyncio.gather(*(run(item) for item in items))


async def run_check_async(
    problem: ProblemDefinition,
    points: Sequence[Point],
    options: SweepOptions,
    command: str = "check",
    checks: Sequence[Check] | None = None,
) -> Report:
    """Every check of ``command`` at every point; records sorted by (check, point index)."""
    checks = tuple(checks or checks_for(problem, command))
    items = [(problem, checks, u, k, options) for k, u in enumerate(points)]
    results = await _fan_out(_evaluate_point, items, options.workers)
    records = [record for batch in results for record in batch]
    logger.info("%s: %d records over %d points", command, len(records), len(points))
    return Report(command, [c.name for c in checks], records, options.informational)


def run_check(
    problem: ProblemDefinition,
    points: Sequence[Point],
    options: SweepOptions | None = None,
    command: str = "check",
    checks: Sequence[Check] | None = None,
) -> Report:
    options = options or SweepOptions()
    return asyncio.run(run_check_async(problem, points, options, command, checks))


def _connection_record(
    problem: ProblemDefinition, u: Point, index: int, tensor: Tensor11 | None
) -> ConnectionRecord:
    try:
        if tensor is None:
            N = point_connection(problem, u)
        elif problem.lagrangian is not None:
            N = lagrange_family_member(problem.lagrangian, tensor, u)
        else:
            N = family_member(
                point_connection(problem, u), tensor, problem.metric, u, problem.singular_det
            )
    except (SingularMetricError, DomainError) as err:
        logger.info("point %d skipped: %s", index, err)
        return ConnectionRecord(index, u, None, str(err))
    return ConnectionRecord(index, u, N.matrix)


async def run_connection_async(
    problem: ProblemDefinition,
    points: Sequence[Point],
    workers: int = 4,
    tensor: Tensor11 | None = None,
) -> list[ConnectionRecord]:
    """N^c (or the family member for ``tensor``) at each point, in point order."""
    if tensor is not None and tensor.dim != problem.dim:
        raise ProblemError(f"tensor is {tensor.dim}x{tensor.dim}, problem dimension {problem.dim}")
    items = [(problem, u, k, tensor) for k, u in enumerate(points)]
    return await _fan_out(_connection_record, items, workers)


def run_connection(
    problem: ProblemDefinition,
    points: Sequence[Point],
    workers: int = 4,
    tensor: Tensor11 | None = None,
) -> list[ConnectionRecord]:
    return asyncio.run(run_connection_async(problem, points, workers, tensor))


def family_check(tensor: Tensor11) -> Check:
    """Metricity and O*-projection of the member N^c + O X for a given X."""

    def residual(problem: ProblemDefinition, u: Point, index: int, seed: int) -> float:
        return _family_residual(problem, u, point_connection(problem, u), tensor)

    return Check("family", residual)


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IntegrationRun:
    """A trajectory with its diagnostics; ``abort`` is set when the guard fired."""

    trajectory: Trajectory
    energies: np.ndarray | None = None
    transported: TransportedVector | None = None
    norms: np.ndarray | None = None
    abort: IntegrationError | None = None

    @property
    def energy_drift(self) -> float | None:
        if self.energies is None:
            return None
        return float(np.max(np.abs(self.energies - self.energies[0])))

    @property
    def norm_drift(self) -> float | None:
        if self.norms is None:
            return None
        return float(np.max(np.abs(self.norms - self.norms[0])))

    def sample_records(self) -> list[dict]:
        n = self.trajectory.dim
        records = []
        for k, (t, state) in enumerate(zip(self.trajectory.times, self.trajectory.states,
                                           strict=True)):
            record = {"t": float(t), "x": state[:n].tolist(), "y": state[n:].tolist()}
            if self.energies is not None:
                record["energy"] = float(self.energies[k])
            if self.transported is not None:
                record["transport"] = self.transported.values[k].tolist()
            if self.norms is not None:
                record["norm"] = float(self.norms[k])
            records.append(record)
        if self.abort is not None:
            reason = getattr(self.abort, "reason", str(self.abort))
            records.append({"abort": True, "t": self.abort.last_time, "reason": reason})
        return records


def run_integrate(
    problem: ProblemDefinition,
    u0: Point,
    h: float,
    steps: int,
    settings: Settings,
    transport: Sequence[float] | None = None,
    connection: str = "metric",
) -> IntegrationRun:
    """Integrate from u0 inside the definition's position box, with optional transport."""
    if u0.dim != problem.dim:
        raise ProblemError(f"start point has dimension {u0.dim}, problem has {problem.dim}")
    if transport is not None and len(transport) != problem.dim:
        raise ProblemError(f"transport vector needs {problem.dim} components")
    G = problem.semispray
    try:
        traj = integrate_sode(G, u0, h, steps, problem.position_box, settings.max_speed)
    except IntegrationError as err:
        logger.warning("%s", err)
        return IntegrationRun(err.trajectory, abort=err)

    energies = None
    if problem.lagrangian is not None:
        energies = conservation_report(problem.lagrangian, traj).energies

    transported = norms = None
    if transport is not None:
        if connection == "induced":
            N = induced_connection(G)
        else:
            N = metric_connection_field(G, problem.metric, problem.singular_det)
        try:
            transported = parallel_transport(G, N, traj, transport)
        except IntegrationError as err:
            logger.warning("%s", err)
            return IntegrationRun(traj, energies, abort=err)
        norms = transported_norms(problem.metric, transported, traj)
    return IntegrationRun(traj, energies, transported, norms)
