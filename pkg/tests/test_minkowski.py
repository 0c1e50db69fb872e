"""Tests for the Minkowski existence solver."""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from facetspace import minkowski
from facetspace.family5 import (
    FamilyParams,
    areas_from_xy,
    build_polytope,
    canonical_normals,
    support_numbers,
)
from facetspace.geometry_core import (
    equal_up_to_translation,
    halfspace_areas,
    intersect_arrays,
    normals_positively_span,
)
from facetspace.minkowski import (
    ConditionsViolatedError,
    InvalidProblemError,
    MinkowskiError,
    MinkowskiProblem,
    NonConvergenceError,
    SolverStalledError,
    areas_from_support,
    check_conditions,
    solve,
    support_volume,
)

if TYPE_CHECKING:
    from facetspace.geometry_core import Polytope

SQRT2 = math.sqrt(2.0)


def _random_polytope_problem(
    rng: np.random.Generator, faces: int
) -> tuple[MinkowskiProblem, Polytope] | None:
    normals = rng.normal(size=(faces, 3))
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    offsets = rng.uniform(1.0, 2.0, size=faces)
    if not normals_positively_span(normals):
        return None
    areas = halfspace_areas(intersect_arrays(normals, offsets))
    keep = areas > 1e-2 * areas.max()
    if keep.sum() < 4 or not normals_positively_span(normals[keep]):
        return None
    trimmed = intersect_arrays(normals[keep], offsets[keep])
    return MinkowskiProblem(normals[keep], halfspace_areas(trimmed)), trimmed


class TestMinkowskiProblem:
    """Test problem construction and parsing."""

    def test_from_dict(self, cube_problem) -> None:
        """Test that the JSON form round trips."""
        parsed = MinkowskiProblem.from_dict(cube_problem.to_dict())
        np.testing.assert_array_equal(parsed.normals, cube_problem.normals)
        np.testing.assert_array_equal(parsed.target_areas, cube_problem.target_areas)
        assert parsed.m == 6

    def test_extra_keys_allowed(self, cube_problem) -> None:
        """Test that richer documents are accepted."""
        document = {**cube_problem.to_dict(), "type": "cube", "x": 1.0}
        assert MinkowskiProblem.from_dict(document).m == 6

    def test_normalizes_normals(self, caplog) -> None:
        """Test that non-unit normals are scaled with a warning."""
        document = {
            "normals": [
                [2, 0, 0],
                [-1, 0, 0],
                [0, 3, 0],
                [0, -1, 0],
                [0, 0, 1],
                [0, 0, -1],
            ],
            "areas": [1, 1, 1, 1, 1, 1],
        }
        with caplog.at_level(logging.WARNING):
            problem = MinkowskiProblem.from_dict(document)
        np.testing.assert_allclose(problem.normals[0], [1.0, 0.0, 0.0])
        np.testing.assert_allclose(problem.normals[2], [0.0, 1.0, 0.0])
        assert "Normalizing 2 non-unit normals" in caplog.text

    def test_unit_normals_are_kept_exactly(self) -> None:
        """Test that rows already of unit length come back bit for bit."""
        normals = canonical_normals()
        document = {"normals": normals.tolist(), "areas": [1, 1, 1, 1, 1]}
        problem = MinkowskiProblem.from_dict(document)
        assert problem.normals.tolist() == normals.tolist()

    @pytest.mark.parametrize(
        ("document", "match"),
        [
            ({"normals": [[0, 0, 1]]}, "areas"),
            ({"normals": [[0, 1]], "areas": [1]}, "normals"),
            ({"normals": [[0, 0, 1]], "areas": [1, 2]}, "1 normals but 2 areas"),
            ({"normals": [[0, 0, 0]], "areas": [1]}, "zero normal"),
            ({"normals": [[0, 0, 1]], "areas": ["many"]}, "areas"),
            ({"normals": [[0, 0, 1]], "areas": [math.nan]}, "finite"),
            ({"normals": [], "areas": [1]}, "normals"),
        ],
    )
    def test_invalid_documents(self, document, match) -> None:
        """Test that malformed documents raise InvalidProblemError."""
        with pytest.raises(InvalidProblemError, match=match):
            MinkowskiProblem.from_dict(document)

    def test_invalid_is_a_value_error(self) -> None:
        """Test the exception hierarchy."""
        assert issubclass(InvalidProblemError, MinkowskiError)
        assert issubclass(InvalidProblemError, ValueError)

    def test_direct_construction_needs_unit_normals(self) -> None:
        """Test that the constructor does not normalize."""
        with pytest.raises(ValueError, match="unit"):
            MinkowskiProblem(np.array([[2.0, 0.0, 0.0]]), np.ones(1))

    def test_arrays_are_read_only(self, cube_problem) -> None:
        """Test that problems cannot be edited in place."""
        with pytest.raises(ValueError, match="read-only"):
            cube_problem.target_areas[0] = 5.0


class TestCheckConditions:
    """Test the three existence conditions."""

    def test_cube(self, cube_problem) -> None:
        """Test that the cube satisfies all conditions."""
        report = check_conditions(cube_problem)
        assert report.passed
        assert report.failures() == []
        assert report.closure_residual == 0.0

    def test_closure_fails(self, cube_normals) -> None:
        """Test unbalanced areas on the cube normals."""
        areas = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 2.0])
        report = check_conditions(MinkowskiProblem(cube_normals, areas))
        assert not report.passed
        assert report.failures() == ["(iii)"]
        assert report.closure_residual == pytest.approx(1.0)

    def test_family_unit_areas(self, family_normals) -> None:
        """Test that unit areas on the family normals do not close."""
        report = check_conditions(MinkowskiProblem(family_normals, np.ones(5)))
        assert report.failures() == ["(iii)"]
        assert report.closure_residual == pytest.approx(3.3431, abs=1e-4)

    def test_non_positive_area(self, cube_normals) -> None:
        """Test that zero areas violate positivity."""
        areas = np.array([1.0, 1.0, 0.0, 0.0, 1.0, 1.0])
        assert check_conditions(MinkowskiProblem(cube_normals, areas)).failures() == [
            "(ii)"
        ]

    def test_coplanar_normals(self) -> None:
        """Test that normals in one plane are not admissible."""
        normals = np.array(
            [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]
        )
        report = check_conditions(MinkowskiProblem(normals, np.ones(4)))
        assert report.failures() == ["(i)"]

    def test_repeated_normal(self, cube_normals) -> None:
        """Test that a repeated direction is not admissible."""
        normals = np.vstack([cube_normals, cube_normals[:1]])
        areas = np.array([0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 0.5])
        report = check_conditions(MinkowskiProblem(normals, areas))
        assert report.failures() == ["(i)"]

    def test_too_few_normals(self) -> None:
        """Test that three faces never bound a polytope."""
        report = check_conditions(MinkowskiProblem(np.eye(3), np.ones(3)))
        assert "(i)" in report.failures()

    def test_to_dict(self, cube_problem) -> None:
        """Test the JSON form."""
        document = check_conditions(cube_problem).to_dict()
        assert document["conditions"] == {"(i)": True, "(ii)": True, "(iii)": True}
        assert document["failures"] == []


class TestSupportFunctions:
    """Test areas and volume as functions of the support numbers."""

    def test_cube_areas(self, cube_normals) -> None:
        """Test the unit cube."""
        areas = areas_from_support(cube_normals, np.full(6, 0.5))
        np.testing.assert_allclose(areas, 1.0)
        assert support_volume(cube_normals, np.full(6, 0.5)) == pytest.approx(1.0)

    def test_family_areas(self, family_normals, type_one_params) -> None:
        """Test the x=1, y=2 family member."""
        areas = areas_from_support(family_normals, support_numbers(type_one_params))
        expected = [8.0, SQRT2, SQRT2, 3.0 * SQRT2, 3.0 * SQRT2]
        np.testing.assert_allclose(areas, expected, rtol=1e-10)

    def test_redundant_plane(self, cube_normals) -> None:
        """Test that a plane that does not touch gets area zero."""
        diagonal = np.ones(3) / math.sqrt(3.0)
        normals = np.vstack([cube_normals, diagonal])
        areas = areas_from_support(normals, [*np.full(6, 0.5), 10.0])
        assert areas[6] == 0.0
        np.testing.assert_allclose(areas[:6], 1.0)

    def test_volume_gradient(self, cube_normals) -> None:
        """Test that face areas are the derivatives of the volume."""
        h = np.array([1.5, 1.5, 1.0, 1.0, 0.5, 0.5])
        step = 1e-6
        gradient = []
        for index in range(6):
            bump = np.zeros(6)
            bump[index] = step
            gradient.append(
                (
                    support_volume(cube_normals, h + bump)
                    - support_volume(cube_normals, h - bump)
                )
                / (2.0 * step)
            )
        np.testing.assert_allclose(
            gradient, areas_from_support(cube_normals, h), rtol=1e-5
        )

    @pytest.mark.parametrize("normal_set", ["cube", "family"])
    def test_volume_gradient_random(
        self, normal_set, cube_normals, family_normals
    ) -> None:
        """Test the derivative identity at 20 random support vectors."""
        normals = cube_normals if normal_set == "cube" else family_normals
        rng = np.random.default_rng(3)
        step = 1e-6
        for _ in range(20):
            h = rng.uniform(0.5, 1.5, size=len(normals))
            areas = areas_from_support(normals, h)
            for index in np.flatnonzero(areas > 1e-3):
                bump = np.zeros(len(normals))
                bump[index] = step
                upper = support_volume(normals, h + bump)
                lower = support_volume(normals, h - bump)
                slope = (upper - lower) / (2.0 * step)
                assert slope == pytest.approx(areas[index], rel=1e-5)


class TestSolve:
    """Test the solver on known polytopes."""

    def test_cube(self, cube_problem) -> None:
        """Test that unit areas give the unit cube at the origin."""
        solution = solve(cube_problem)
        assert solution.iterations <= 1000
        np.testing.assert_allclose(solution.support, 0.5, atol=1e-6)
        np.testing.assert_allclose(solution.polytope.centroid, 0.0, atol=1e-9)
        assert solution.area_residual <= 1e-6

    def test_box(self, box_problem) -> None:
        """Test that areas (2, 2, 3, 3, 6, 6) give the 3 x 2 x 1 box."""
        solution = solve(box_problem)
        assert solution.area_residual <= 1e-6
        extent = np.ptp(solution.polytope.vertices, axis=0)
        np.testing.assert_allclose(extent, [3.0, 2.0, 1.0], rtol=1e-5)

    def test_family_member(self, family_problem, type_one_polytope) -> None:
        """Test that the family areas rebuild the family polytope."""
        solution = solve(family_problem, tol=1e-8)
        assert equal_up_to_translation(solution.polytope, type_one_polytope, tol=1e-5)

    def test_scale_equivariance(self, family_problem) -> None:
        """Test that scaling areas by 4 scales the support numbers by 2."""
        areas = family_problem.target_areas * 4.0
        scaled = MinkowskiProblem(family_problem.normals, areas)
        small = solve(family_problem, tol=1e-8)
        large = solve(scaled, tol=1e-8)
        np.testing.assert_allclose(large.support, 2.0 * small.support, atol=1e-5)

    def test_conditions_violated(self, family_normals) -> None:
        """Test that non-closing areas are rejected with their report."""
        with pytest.raises(ConditionsViolatedError, match=r"\(iii\)") as err:
            solve(MinkowskiProblem(family_normals, np.ones(5)))
        assert err.value.report.failures() == ["(iii)"]

    def test_iteration_budget(self, box_problem) -> None:
        """Test that a single step is not enough for the box."""
        with pytest.raises(NonConvergenceError, match="after 1 iterations") as err:
            solve(box_problem, max_iter=1)
        assert err.value.iterations == 1
        assert err.value.residual > 1e-6

    def test_stalled_line_search(self, box_problem, mocker) -> None:
        """Test that a line search without any admissible step is a stall."""
        mocker.patch("facetspace.minkowski.MIN_STEP", 2.0)
        with pytest.raises(SolverStalledError, match="no ascent step") as err:
            solve(box_problem)
        assert isinstance(err.value, NonConvergenceError)
        assert err.value.iterations == 0
        assert "iteration budget" not in str(err.value)

    def test_constraint_holds_every_iteration(self, box_problem, mocker) -> None:
        """Test that every evaluated support vector keeps sum w_k h_k = 1."""
        spy = mocker.spy(minkowski, "_measure")
        solution = solve(box_problem)
        weights = box_problem.target_areas / box_problem.target_areas.sum()
        # The last two evaluations are the rescaled and centered solution.
        levels = [float(weights @ call.args[1]) for call in spy.call_args_list[:-2]]
        assert len(levels) > solution.iterations
        np.testing.assert_allclose(levels, 1.0, atol=1e-12)
        assert solution.constraint_drift <= 1e-12

    def test_to_dict(self, cube_problem) -> None:
        """Test the JSON form."""
        document = solve(cube_problem).to_dict()
        assert len(document["support"]) == 6
        assert len(document["polytope"]["vertices"]) == 8


@pytest.mark.slow
class TestRandomRoundTrips:
    """Randomized solve-and-compare checks at the default tolerance."""

    def test_family_members(self) -> None:
        """Test 50 random family members."""
        rng = np.random.default_rng(7)
        normals = canonical_normals()
        for _ in range(50):
            x, y = rng.uniform(0.1, 10.0, size=2)
            params = FamilyParams(x=x, y=y)
            problem = MinkowskiProblem(normals, areas_from_xy(params))
            solution = solve(problem)
            assert solution.area_residual <= 1e-6
            assert equal_up_to_translation(
                solution.polytope, build_polytope(params), tol=1e-5
            )

    def test_random_normals(self) -> None:
        """Test 20 polytopes cut by up to eight random planes."""
        rng = np.random.default_rng(11)
        solved = 0
        while solved < 20:
            drawn = _random_polytope_problem(rng, faces=8)
            if drawn is None:
                continue
            problem, source = drawn
            solution = solve(problem, tol=1e-7)
            achieved = halfspace_areas(solution.polytope)
            np.testing.assert_allclose(achieved, problem.target_areas, rtol=1e-7)
            assert equal_up_to_translation(solution.polytope, source, tol=1e-5)
            solved += 1
