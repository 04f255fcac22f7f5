#!/usr/bin/env python
"""MCP server exposing spray_geometry checks to agent clients over stdio.

Both tools take the problem definition as TOML text, so a client never needs
file access on the server side.
"""

import asyncio
import json
import logging

from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import TextContent, Tool

from spray_geometry.config import load_settings
from spray_geometry.problem import load_problem_text, parse_point, sample_points
from spray_geometry.sweeps import SweepOptions, run_check_async, run_connection_async

logger = logging.getLogger(__name__)

app = Server("geometry-server")


# ---------------------------------------------------------------------------
# Tool implementations
# ---------------------------------------------------------------------------

async def check_problem(
    definition: str,
    samples: int | None = None,
    seed: int | None = None,
    expect_helmholtz_fail: bool = False,
) -> dict:
    """Run every check of the definition's mode; summary plus per-point records."""
    settings = load_settings()
    problem = load_problem_text(definition, "<tool input>", settings)
    options = SweepOptions(
        tolerances=problem.resolve_tolerances(settings),
        seed=problem.seed if seed is None else seed,
        workers=settings.workers,
        informational=frozenset({"helmholtz"}) if expect_helmholtz_fail else frozenset(),
    )
    points = sample_points(problem, samples, seed)
    report = await run_check_async(problem, points, options)
    return {
        "summary": report.summary_json(),
        "records": [r.to_json() for r in report.records],
    }


async def connection_at(definition: str, point: list[float]) -> dict:
    """N^i_j at one point: N^c for generalized problems, dG/dy for Lagrangians."""
    settings = load_settings()
    problem = load_problem_text(definition, "<tool input>", settings)
    u = parse_point(point, problem.dim)
    (record,) = await run_connection_async(problem, [u], settings.workers)
    result = record.to_json()
    if record.note is not None:
        result["skipped"] = record.note
    return result


# ---------------------------------------------------------------------------
# MCP handlers
# ---------------------------------------------------------------------------

DEFINITION_SCHEMA = {
    "type": "string",
    "description": (
        "Problem definition in TOML: [problem] dim/mode/lagrangian, [metric] g11.., "
        "[semispray] G1.., [domain] x1=[lo,hi].., optional [sampling] and [tolerances]"
    ),
}


@app.list_tools()
async def list_tools() -> list[Tool]:
    return [
        Tool(
            name="check_problem",
            description=(
                "Verify a semispray/metric pair or a Lagrangian on sampled points: "
                "metricity of the metric connection, the Obata family, the Helmholtz "
                "condition and, for Lagrangians, uniqueness, symplectic and Hermitian "
                "identities and energy conservation. Returns residuals per check and point."
            ),
            inputSchema={
                "type": "object",
                "properties": {
                    "definition": DEFINITION_SCHEMA,
                    "samples": {
                        "type": "integer",
                        "description": "Number of sampled points (default from the definition)",
                    },
                    "seed": {
                        "type": "integer",
                        "description": "Sampling seed (default from the definition)",
                    },
                    "expect_helmholtz_fail": {
                        "type": "boolean",
                        "description": "Report Helmholtz failures as informational",
                        "default": False,
                    },
                },
                "required": ["definition"],
            },
        ),
        Tool(
            name="connection_at",
            description=(
                "Coefficients N^i_j of the metric nonlinear connection (or the canonic "
                "connection of a Lagrangian) at one point of the tangent bundle."
            ),
            inputSchema={
                "type": "object",
                "properties": {
                    "definition": DEFINITION_SCHEMA,
                    "point": {
                        "type": "array",
                        "items": {"type": "number"},
                        "description": "Coordinates x1..xn followed by y1..yn",
                    },
                },
                "required": ["definition", "point"],
            },
        ),
    ]


@app.call_tool()
async def call_tool(name: str, arguments: dict) -> list[TextContent]:
    try:
        definition = arguments.get("definition")
        if not definition:
            raise ValueError("definition parameter is required")

        if name == "check_problem":
            result = await check_problem(
                definition,
                samples=arguments.get("samples"),
                seed=arguments.get("seed"),
                expect_helmholtz_fail=arguments.get("expect_helmholtz_fail", False),
            )

        elif name == "connection_at":
            point = arguments.get("point")
            if point is None:
                raise ValueError("point parameter is required")
            result = await connection_at(definition, point)

        else:
            raise ValueError(f"Unknown tool: {name}")

        return [TextContent(type="text", text=json.dumps(result, indent=2))]

    except Exception as e:
        logger.warning("tool %s failed: %s", name, e)
        raise RuntimeError(f"Error in {name}: {e}") from e


async def main():
    """Run the MCP server on stdio."""
    async with stdio_server() as (read_stream, write_stream):
        await app.run(
            read_stream,
            write_stream,
            app.create_initialization_options(),
        )


if __name__ == "__main__":
    asyncio.run(main())
