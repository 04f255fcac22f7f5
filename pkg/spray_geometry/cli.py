#!/usr/bin/env python
"""spray-geometry - verify metric nonlinear connections on sampled points of the tangent bundle.

Usage:
    spray-geometry check <definition> [--json] [--expect-helmholtz-fail]
    spray-geometry connection <definition> [--at x1,...,yn ...]
    spray-geometry family <definition> --tensor <file|"a,b;c,d">
    spray-geometry integrate <definition> --from x1,...,yn --h 1e-3 --steps 1000
                             [--transport X1,...,Xn] [--connection metric|induced]
                             [--output samples.jsonl]
    spray-geometry hermitian <definition>

Exit codes: 0 every check passed, 1 a tolerance failure or an aborted
integration, 2 an invalid definition, flag or setting.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path

from spray_geometry import __version__
from spray_geometry.config import Settings, load_settings
from spray_geometry.errors import ConfigError, ExpressionError, ProblemError
from spray_geometry.geometry import Tensor11
from spray_geometry.problem import ProblemDefinition, load_problem, parse_point, sample_points
from spray_geometry.report import (
    EXIT_INPUT,
    EXIT_OK,
    EXIT_TOLERANCE,
    Report,
    connections_ndjson,
    connections_table,
    format_number,
    format_point,
)
from spray_geometry.sweeps import (
    IntegrationRun,
    SweepOptions,
    family_check,
    run_check,
    run_connection,
    run_integrate,
)

logger = logging.getLogger(__name__)

RUN_LOG_NAME = "spray_geometry.run_log"


def run_logger(log_dir: Path) -> logging.Logger:
    """JSONL log of every invocation, rotated at 10MB with 5 backups."""
    run_log = logging.getLogger(RUN_LOG_NAME)
    run_log.setLevel(logging.INFO)
    run_log.propagate = False
    target = (log_dir / "runs.jsonl").resolve()
    for handler in list(run_log.handlers):
        if Path(getattr(handler, "baseFilename", "")) != target:
            run_log.removeHandler(handler)
            handler.close()
    if not run_log.handlers:
        log_dir.mkdir(parents=True, exist_ok=True)
        handler = RotatingFileHandler(target, maxBytes=10 * 1024 * 1024, backupCount=5)
        handler.setFormatter(logging.Formatter("%(message)s"))
        run_log.addHandler(handler)
    return run_log


def log_run(settings: Settings, entry: dict):
    entry = {"timestamp": datetime.now(timezone.utc).isoformat(), **entry}
    try:
        run_logger(settings.log_dir).info(json.dumps(entry))
    except OSError as e:
        logger.warning("could not write run log: %s", e)


def _tensor_argument(text: str, dim: int) -> Tensor11:
    """A (1,1) tensor from a file or inline text; rows split by ';' or newlines."""
    path = Path(text)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    rows = [row for row in text.replace("\n", ";").split(";") if row.strip()]
    cells = [[cell.strip() for cell in row.split(",")] for row in rows]
    if len(cells) != dim or any(len(row) != dim for row in cells):
        raise ProblemError(f"tensor must be {dim}x{dim}, got rows {[len(r) for r in cells]}")
    return Tensor11.from_texts(cells, dim)


def _vector_argument(text: str, dim: int, what: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as e:
        raise ProblemError(f"{what}: expected comma-separated numbers") from e
    if len(values) != dim:
        raise ProblemError(f"{what} needs {dim} components")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("definition", type=Path, help="problem definition (TOML)")
    common.add_argument("--seed", type=int, help="sampling seed (overrides the definition)")
    common.add_argument("--samples", type=int, help="number of sampled points")
    common.add_argument("--tol-algebraic", type=float, help="identity-level tolerance")
    common.add_argument("--tol-derived", type=float, help="tolerance for derived checks")
    common.add_argument("--json", action="store_true", help="emit only the NDJSON stream")
    common.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="spray-geometry",
        description="Metric nonlinear connections of semisprays and Lagrange spaces",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", parents=[common], help="run every check")
    check.add_argument(
        "--expect-helmholtz-fail",
        action="store_true",
        help="report Helmholtz failures as informational",
    )

    connection = commands.add_parser(
        "connection", parents=[common], help="print N^i_j at points"
    )
    connection.add_argument(
        "--at", action="append", default=[], metavar="x1,...,yn", help="evaluation point"
    )

    family = commands.add_parser(
        "family", parents=[common], help="deform N^c by a (1,1) tensor"
    )
    family.add_argument("--tensor", required=True, help="file or inline 'a,b;c,d'")
    family.add_argument("--at", action="append", default=[], metavar="x1,...,yn")

    integrate = commands.add_parser("integrate", parents=[common], help="integrate the SODE")
    integrate.add_argument("--from", dest="start", required=True, metavar="x1,...,yn")
    integrate.add_argument("--h", type=float, required=True, help="step size")
    integrate.add_argument("--steps", type=int, required=True)
    integrate.add_argument("--transport", metavar="X1,...,Xn", help="transport this vector")
    integrate.add_argument(
        "--connection", choices=("metric", "induced"), default="metric",
        help="connection used for transport",
    )
    integrate.add_argument("--output", type=Path, help="write one JSON record per sample")

    commands.add_parser("hermitian", parents=[common], help="almost Hermitian identities")
    return parser


def _points(args, problem: ProblemDefinition):
    explicit = getattr(args, "at", None)
    if explicit:
        return [parse_point(text, problem.dim, "--at") for text in explicit]
    return sample_points(problem, args.samples, args.seed)


def _sweep_options(args, problem: ProblemDefinition, settings: Settings) -> SweepOptions:
    expect_fail = getattr(args, "expect_helmholtz_fail", False)
    informational = frozenset({"helmholtz"}) if expect_fail else frozenset()
    return SweepOptions(
        tolerances=problem.resolve_tolerances(settings, args.tol_algebraic, args.tol_derived),
        seed=problem.seed if args.seed is None else args.seed,
        workers=settings.workers,
        informational=informational,
    )


def _emit_report(report: Report, as_json: bool):
    sys.stdout.write(report.to_ndjson() if as_json else report.to_table())


def _command_check(args, problem: ProblemDefinition, settings: Settings) -> tuple[int, dict]:
    options = _sweep_options(args, problem, settings)
    report = run_check(problem, _points(args, problem), options, args.command)
    _emit_report(report, args.json)
    return report.exit_code, {"failed": len(report.failures), "skipped": report.skipped}


def _command_connection(args, problem: ProblemDefinition, settings: Settings) -> tuple[int, dict]:
    records = run_connection(problem, _points(args, problem), settings.workers)
    sys.stdout.write(connections_ndjson(records) if args.json else connections_table(records))
    skipped = sum(1 for r in records if r.matrix is None)
    return EXIT_OK, {"points": len(records), "skipped": skipped}


def _command_family(args, problem: ProblemDefinition, settings: Settings) -> tuple[int, dict]:
    tensor = _tensor_argument(args.tensor, problem.dim)
    points = _points(args, problem)
    records = run_connection(problem, points, settings.workers, tensor)
    options = _sweep_options(args, problem, settings)
    report = run_check(problem, points, options, "family", [family_check(tensor)])
    if args.json:
        sys.stdout.write(connections_ndjson(records) + report.to_ndjson())
    else:
        sys.stdout.write(connections_table(records) + report.to_table())
    return report.exit_code, {"failed": len(report.failures), "skipped": report.skipped}


def _integration_summary(run: IntegrationRun, h: float) -> str:
    traj = run.trajectory
    lines = [
        f"integrate: {len(traj) - 1} steps, h = {format_number(h)}, "
        f"t = [0, {format_number(traj.times[-1])}]",
        f"final {format_point(traj.final_point)}",
    ]
    if run.energy_drift is not None:
        lines.append(f"energy drift: {run.energy_drift:.3e}")
    if run.norm_drift is not None:
        final = ", ".join(format_number(v) for v in run.transported.values[-1])
        lines.append(f"transported X = ({final})")
        lines.append(f"transport g(X,X) drift: {run.norm_drift:.3e}")
    if run.abort is not None:
        lines.append(f"ABORT {run.abort}")
    return "\n".join(lines) + "\n"


def _command_integrate(args, problem: ProblemDefinition, settings: Settings) -> tuple[int, dict]:
    u0 = parse_point(args.start, problem.dim, "--from")
    if not args.h > 0:
        raise ProblemError("--h must be positive")
    if args.steps < 1:
        raise ProblemError("--steps must be at least 1")
    transport = None
    if args.transport is not None:
        transport = _vector_argument(args.transport, problem.dim, "--transport")
    run = run_integrate(problem, u0, args.h, args.steps, settings, transport, args.connection)
    records = run.sample_records()
    if args.output is not None:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        with args.output.open("w", encoding="utf-8") as f:
            f.writelines(json.dumps(record) + "\n" for record in records)
    if args.json:
        sys.stdout.writelines(json.dumps(record) + "\n" for record in records)
    else:
        sys.stdout.write(_integration_summary(run, args.h))
    entry = {"steps": len(run.trajectory) - 1, "aborted": run.abort is not None}
    if run.energy_drift is not None:
        entry["energy_drift"] = run.energy_drift
    if run.norm_drift is not None:
        entry["norm_drift"] = run.norm_drift
    return (EXIT_TOLERANCE if run.abort is not None else EXIT_OK), entry


COMMANDS = {
    "check": _command_check,
    "connection": _command_connection,
    "family": _command_family,
    "integrate": _command_integrate,
    "hermitian": _command_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    entry = {"command": args.command, "definition": str(args.definition), "seed": args.seed}
    settings = None
    try:
        settings = load_settings()
        problem = load_problem(args.definition, settings)
        code, summary = COMMANDS[args.command](args, problem, settings)
        entry.update(summary)
    except (ProblemError, ExpressionError, ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        code = EXIT_INPUT
        entry["error"] = str(e)
    entry["exit_code"] = code
    log_run(settings or Settings(), entry)
    return code


if __name__ == "__main__":
    sys.exit(main())
