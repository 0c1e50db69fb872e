"""Conftest file for facetspace tests."""

from __future__ import annotations

import json
from typing import TYPE_CHECKING, Any

import numpy as np
import pytest
from typer.testing import CliRunner

from facetspace.cli import app
from facetspace.const import LOGGER
from facetspace.family5 import FamilyParams, build_polytope, canonical_normals
from facetspace.geometry_core import halfspace_areas
from facetspace.minkowski import MinkowskiProblem

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator
    from pathlib import Path

    from click.testing import Result
    from numpy.typing import NDArray

    from facetspace.geometry_core import Polytope

CUBE_NORMALS = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
)


@pytest.fixture
def cube_normals() -> NDArray[np.float64]:
    """Return the six axis normals +-e_j."""
    return CUBE_NORMALS.copy()


@pytest.fixture
def family_normals() -> NDArray[np.float64]:
    """Return the five canonical normals."""
    return canonical_normals()


@pytest.fixture
def type_one_params() -> FamilyParams:
    """Return the x=1, y=2 family parameters (Type I)."""
    return FamilyParams(x=1.0, y=2.0)


@pytest.fixture
def type_one_polytope(
    type_one_params: FamilyParams,  # pylint: disable=redefined-outer-name
) -> Polytope:
    """Return the kernel-built x=1, y=2 polytope."""
    return build_polytope(type_one_params)


@pytest.fixture
def cube_problem() -> MinkowskiProblem:
    """Return the unit cube problem."""
    return MinkowskiProblem(CUBE_NORMALS, np.ones(6))


@pytest.fixture
def family_problem(
    type_one_polytope: Polytope,  # pylint: disable=redefined-outer-name
) -> MinkowskiProblem:
    """Return the problem whose areas are measured on the x=1, y=2 polytope."""
    return MinkowskiProblem(canonical_normals(), halfspace_areas(type_one_polytope))


@pytest.fixture
def box_problem() -> MinkowskiProblem:
    """Return the box problem with edges (3, 2, 1)."""
    return MinkowskiProblem(CUBE_NORMALS, np.array([2.0, 2.0, 3.0, 3.0, 6.0, 6.0]))


@pytest.fixture
def write_problem(tmp_path: Path) -> Callable[..., Path]:
    """Return a helper that writes a problem document into tmp_path."""

    def _write(document: dict[str, Any], name: str = "problem.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write


@pytest.fixture(autouse=True)
def reset_logging() -> Iterator[None]:
    """Drop handlers and levels that setup_logging attached during a test."""
    handlers = list(LOGGER.handlers)
    level = LOGGER.level
    yield
    for handler in list(LOGGER.handlers):
        if handler not in handlers:
            LOGGER.removeHandler(handler)
    LOGGER.setLevel(level)


@pytest.fixture
def runner() -> CliRunner:
    """Return a CLI runner."""
    return CliRunner()


@pytest.fixture
def invoke(
    runner: CliRunner,  # pylint: disable=redefined-outer-name
    tmp_path: Path,
) -> Callable[..., Result]:
    """Return a helper running the app with warnings-only logging."""
    quiet = tmp_path / "quiet.yaml"
    quiet.write_text("logger:\n  default: warning\n", encoding="utf-8")

    def _invoke(*args: str, stdin: str | None = None) -> Result:
        return runner.invoke(app, ["--config", str(quiet), *args], input=stdin)

    return _invoke
