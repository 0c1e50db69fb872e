"""Command-line interface for facetspace."""

from __future__ import annotations

import csv
import json
import math
import sys
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Any

import typer

from .config import (
    ConfigError,
    OutputFormat,
    RunConfig,
    Subcommand,
    load_config,
    setup_logging,
)
from .configspace_analysis import (
    DegenerateDirectionError,
    InvalidProbeError,
    convexity_witness,
    probe_line,
)
from .const import LOGGER, NAME, WITNESS_STEP
from .family5 import (
    FamilyParams,
    InvalidParamsError,
    PerimeterVector,
    Verdict,
    basis_vectors,
    build_polytope,
    canonical_normals,
    classify,
    xy_from_perimeters,
)
from .geometry_core import (
    PolytopeError,
    halfspace_areas,
    halfspace_perimeters,
    polytope_report,
    to_off,
)
from .minkowski import (
    ConditionsViolatedError,
    MinkowskiProblem,
    NonConvergenceError,
    check_conditions,
    solve,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3

TYPE_LABELS = {
    Verdict.TYPE_I: "Type I",
    Verdict.TYPE_II: "Type II",
    Verdict.TYPE_III: "Type III",
    Verdict.NOT_MEMBER: "NotMember",
}

app = typer.Typer(
    name=NAME,
    help="Face-perimeter and face-area configuration spaces of convex polytopes.",
    no_args_is_help=True,
    add_completion=False,
)


class ProbeAxis(StrEnum):
    """Named probe directions."""

    V_I = "vI"
    V_II = "vII"
    V_III = "vIII"


class ProbeCenter(StrEnum):
    """Named probe centers."""

    V_II = "vII"
    ONES = "ones"


def _fail(message: str, code: int) -> typer.Exit:
    LOGGER.error("%s", message)
    return typer.Exit(code)


def _dumps(document: dict[str, Any]) -> str:
    return json.dumps(document, indent=2)


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text if text.endswith("\n") else f"{text}\n", encoding="utf-8")
    except OSError as err:
        raise _fail(f"Cannot write {path}: {err.strerror}", EXIT_USAGE) from err
    LOGGER.info("Wrote %s", path)


def _parse_floats(text: str, count: int, option: str) -> list[float]:
    try:
        values = [float(item) for item in text.split(",")]
    except ValueError as err:
        msg = f"expected {count} comma-separated numbers, got {text!r}"
        raise typer.BadParameter(msg, param_hint=option) from err
    if len(values) != count or not all(math.isfinite(value) for value in values):
        msg = f"expected {count} finite comma-separated numbers, got {text!r}"
        raise typer.BadParameter(msg, param_hint=option)
    return values


def _config(ctx: typer.Context, **overrides: Any) -> RunConfig:
    base = ctx.obj if isinstance(ctx.obj, RunConfig) else RunConfig()
    try:
        return base.with_overrides(**overrides)
    except ConfigError as err:
        raise _fail(str(err), EXIT_USAGE) from err


def _read_problem(path: Path) -> MinkowskiProblem:
    try:
        if str(path) == "-":
            text = sys.stdin.read()
        else:
            text = path.read_text(encoding="utf-8")
        return MinkowskiProblem.from_dict(json.loads(text))
    except OSError as err:
        raise _fail(f"Cannot read {path}: {err.strerror}", EXIT_USAGE) from err
    except (json.JSONDecodeError, ValueError, TypeError) as err:
        raise _fail(f"Cannot parse problem {path}: {err}", EXIT_USAGE) from err


@app.callback()
def main(
    ctx: typer.Context,
    config: Annotated[
        Path | None, typer.Option("--config", help="YAML configuration file.")
    ] = None,
    verbose: Annotated[
        bool, typer.Option("--verbose", "-v", help="Log debug detail.")
    ] = False,
) -> None:
    """Face-perimeter and face-area configuration spaces of convex polytopes."""
    try:
        run_config = load_config(config)
    except ConfigError as err:
        raise _fail(str(err), EXIT_USAGE) from err
    setup_logging(run_config, verbose=verbose)
    ctx.obj = run_config


@app.command()
def build(
    ctx: typer.Context,
    x: Annotated[float, typer.Option("--x", help="Half length of AB.")],
    y: Annotated[float, typer.Option("--y", help="Half length of BC.")],
    center: Annotated[
        str | None, typer.Option("--center", help="Base center as cx,cy,cz.")
    ] = None,
    output_format: Annotated[
        OutputFormat | None, typer.Option("--format", help="File format for --out.")
    ] = None,
    out: Annotated[Path | None, typer.Option("--out", help="Output file.")] = None,
) -> None:
    """Build the five-normal polytope on a 2x by 2y base."""
    base_center = (0.0, 0.0, 0.0)
    if center is not None:
        cx, cy, cz = _parse_floats(center, 3, "--center")
        base_center = (cx, cy, cz)
    config = _config(
        ctx,
        subcommand=Subcommand.BUILD,
        output_format=output_format,
        output_path=out,
    )
    try:
        params = FamilyParams(x=x, y=y, base_center=base_center)
    except InvalidParamsError as err:
        raise _fail(str(err), EXIT_USAGE) from err

    polytope = build_polytope(params)
    perimeters = PerimeterVector.from_sequence(halfspace_perimeters(polytope))
    verdict = classify(perimeters, config.eps_class).verdict
    document = {
        "type": TYPE_LABELS[verdict],
        "verdict": str(verdict),
        "x": params.x,
        "y": params.y,
        "perimeters": perimeters.to_list(),
        "normals": [[float(c) for c in row] for row in canonical_normals()],
        "areas": [float(value) for value in halfspace_areas(polytope)],
        "polytope": polytope_report(polytope),
    }
    if config.output_path is not None:
        if config.output_format is OutputFormat.CSV:
            msg = "build writes json or off; csv is produced by probe"
            raise _fail(msg, EXIT_USAGE)
        if config.output_format is OutputFormat.OFF:
            _write(config.output_path, to_off(polytope))
        else:
            _write(config.output_path, _dumps(document))
    LOGGER.info(
        "Built %s polytope: %d vertices, %d faces",
        TYPE_LABELS[verdict],
        len(polytope.vertices),
        len(polytope.faces),
    )
    typer.echo(_dumps(document))


@app.command(name="classify")
def classify_command(
    ctx: typer.Context,
    perimeters: Annotated[
        str, typer.Option("--L", "--perimeters", help="L1,...,L5 comma-separated.")
    ],
    tol: Annotated[float | None, typer.Option("--tol", help="Relative band.")] = None,
    out: Annotated[Path | None, typer.Option("--out", help="Output file.")] = None,
) -> None:
    """Decide which family type realizes five face perimeters."""
    vector = PerimeterVector.from_sequence(_parse_floats(perimeters, 5, "--L"))
    config = _config(
        ctx, subcommand=Subcommand.CLASSIFY, eps_class=tol, output_path=out
    )
    result = classify(vector, config.eps_class)
    document: dict[str, Any] = {
        "perimeters": vector.to_list(),
        "type": TYPE_LABELS[result.verdict],
        **result.to_dict(),
    }
    if result.verdict.is_member:
        params = xy_from_perimeters(vector, config.eps_class)
        document["x"] = params.x
        document["y"] = params.y
    if config.output_path is not None:
        _write(config.output_path, _dumps(document))
    typer.echo(_dumps(document))
    raise typer.Exit(EXIT_OK if result.verdict.is_member else EXIT_NEGATIVE)


def _probe_vectors(
    center: ProbeCenter, direction: ProbeAxis
) -> tuple[PerimeterVector, PerimeterVector]:
    basis = basis_vectors()
    axes = {
        ProbeAxis.V_I: basis.v_i,
        ProbeAxis.V_II: basis.v_ii,
        ProbeAxis.V_III: basis.v_iii,
    }
    origin = basis.v_ii
    if center is ProbeCenter.ONES:
        origin = PerimeterVector(1.0, 1.0, 1.0, 1.0, 1.0)
    return origin, axes[direction]


@app.command()
def probe(
    ctx: typer.Context,
    radius: Annotated[float | None, typer.Option("--radius")] = None,
    steps: Annotated[int | None, typer.Option("--steps")] = None,
    direction: Annotated[ProbeAxis, typer.Option("--direction")] = ProbeAxis.V_I,
    center: Annotated[ProbeCenter, typer.Option("--center")] = ProbeCenter.V_II,
    out: Annotated[
        Path | None, typer.Option("--out", help="Writes <out>.json and <out>.csv.")
    ] = None,
) -> None:
    """Sample the configuration space along a line and count half-branches."""
    config = _config(
        ctx,
        subcommand=Subcommand.PROBE,
        probe_radius=radius,
        probe_steps=steps,
        output_path=out,
    )
    origin, axis = _probe_vectors(center, direction)
    try:
        report = probe_line(
            origin, axis, config.probe_radius, config.probe_steps, config.eps_class
        )
    except (InvalidProbeError, DegenerateDirectionError) as err:
        raise _fail(str(err), EXIT_USAGE) from err

    if config.output_path is not None:
        _write(config.output_path.with_suffix(".json"), _dumps(report.to_dict()))
        table = config.output_path.with_suffix(".csv")
        try:
            with table.open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(("t", "member", "type"))
                writer.writerows(report.csv_rows())
        except OSError as err:
            raise _fail(f"Cannot write {table}: {err.strerror}", EXIT_USAGE) from err
        LOGGER.info("Wrote %s", table)
    typer.echo(
        _dumps(
            {
                "half_branch_count": report.half_branch_count,
                "branch_intervals": [
                    interval.to_dict() for interval in report.branch_intervals
                ],
            }
        )
    )


@app.command(name="witness-nonconvex")
def witness_nonconvex(
    ctx: typer.Context,
    step: Annotated[float, typer.Option("--step")] = WITNESS_STEP,
    out: Annotated[Path | None, typer.Option("--out", help="Output file.")] = None,
) -> None:
    """Show two members whose midpoint is not a member."""
    config = _config(ctx, subcommand=Subcommand.WITNESS_NONCONVEX, output_path=out)
    try:
        witness = convexity_witness(step, config.eps_class)
    except ValueError as err:
        raise _fail(str(err), EXIT_USAGE) from err
    document = witness.to_dict()
    if config.output_path is not None:
        _write(config.output_path, _dumps(document))
    typer.echo(_dumps(document))
    raise typer.Exit(EXIT_OK if witness.demonstrates_nonconvexity else EXIT_NEGATIVE)


@app.command()
def minkowski(
    ctx: typer.Context,
    problem: Annotated[
        Path, typer.Option("--problem", help="Problem JSON, or - for stdin.")
    ],
    tol: Annotated[float | None, typer.Option("--tol")] = None,
    max_iter: Annotated[int | None, typer.Option("--max-iter")] = None,
    out: Annotated[
        Path | None, typer.Option("--out", help="Writes <out>.json and <out>.off.")
    ] = None,
) -> None:
    """Solve for the polytope with the given face normals and areas."""
    config = _config(
        ctx,
        subcommand=Subcommand.MINKOWSKI,
        input_path=problem,
        solver_tol=tol,
        solver_max_iter=max_iter,
        output_path=out,
    )
    minkowski_problem = _read_problem(problem)
    try:
        solution = solve(minkowski_problem, config.solver_tol, config.solver_max_iter)
    except ConditionsViolatedError as err:
        typer.echo(_dumps(err.report.to_dict()))
        raise _fail(str(err), EXIT_NEGATIVE) from err
    except NonConvergenceError as err:
        raise _fail(str(err), EXIT_NONCONVERGENCE) from err
    except PolytopeError as err:
        raise _fail(str(err), EXIT_NEGATIVE) from err

    document = {**minkowski_problem.to_dict(), **solution.to_dict()}
    if config.output_path is not None:
        _write(config.output_path.with_suffix(".json"), _dumps(document))
        _write(config.output_path.with_suffix(".off"), to_off(solution.polytope))
    LOGGER.info(
        "Solved in %d iterations, area residual %.3e",
        solution.iterations,
        solution.area_residual,
    )
    typer.echo(_dumps(document))


@app.command(name="check-closure")
def check_closure(
    ctx: typer.Context,
    problem: Annotated[
        Path, typer.Option("--problem", help="Problem JSON, or - for stdin.")
    ],
    out: Annotated[Path | None, typer.Option("--out", help="Output file.")] = None,
) -> None:
    """Report the existence conditions for a normals/areas problem."""
    config = _config(
        ctx, subcommand=Subcommand.CHECK_CLOSURE, input_path=problem, output_path=out
    )
    report = check_conditions(_read_problem(problem))
    document = report.to_dict()
    if config.output_path is not None:
        _write(config.output_path, _dumps(document))
    typer.echo(_dumps(document))
    raise typer.Exit(EXIT_OK if report.passed else EXIT_NEGATIVE)

