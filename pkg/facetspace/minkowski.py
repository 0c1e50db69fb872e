"""Minkowski existence problem in R^3: polytopes from face normals and areas.

The solver works on support numbers h. Among all h with sum_k w_k h_k = 1,
where w are the target areas normalized to sum 1, the volume is maximal
exactly when the face areas are proportional to w. Since dV/dh_k is the
area of face k, projected gradient ascent needs nothing beyond the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np
import voluptuous as vol

from .configspace_analysis import area_closure_residual, relative_closure_residual
from .const import (
    ARMIJO_SLOPE,
    EPS_CLOSURE,
    LOGGER,
    RANK_RTOL,
    SOLVER_MAX_ITER,
    SOLVER_TOL,
)
from .geometry_core import (
    PolytopeError,
    PolytopeUnboundedError,
    halfspace_areas,
    intersect_arrays,
    normals_positively_span,
    polytope_report,
    volume,
)

if TYPE_CHECKING:
    from collections.abc import Mapping

    from numpy.typing import ArrayLike, NDArray

    from .geometry_core import Polytope

MIN_NORMAL_ANGLE = 1e-8
NORMAL_UNIT_TOL = 1e-9
MIN_STEP = 1e-16
FLAT_RTOL = 1e-13
DRIFT_WARNING = 1e-9
LOG_EVERY = 100


class MinkowskiError(Exception):
    """Exception to indicate a Minkowski problem error."""


class InvalidProblemError(MinkowskiError, ValueError):
    """Exception raised when a problem document is malformed."""

    def __init__(self, reason: str) -> None:
        """Initialize InvalidProblemError with the validation message."""
        super().__init__(f"Invalid Minkowski problem: {reason}")


class ConditionsViolatedError(MinkowskiError):
    """Exception raised when the existence conditions fail."""

    def __init__(self, report: ConditionsReport) -> None:
        """Initialize ConditionsViolatedError with the condition report."""
        super().__init__(
            f"Existence conditions {', '.join(report.failures())} failed "
            f"(closure residual {report.closure_residual:.6g})"
        )
        self.report = report


class NonConvergenceError(MinkowskiError):
    """Exception raised when the iteration budget runs out above the tolerance."""

    hint: ClassVar[str] = "retry with a larger iteration budget"

    def __init__(self, iterations: int, residual: float) -> None:
        """Initialize NonConvergenceError with the final solver state."""
        super().__init__(
            f"Solver stopped after {iterations} iterations with area residual "
            f"{residual:.3e}; {self.hint}"
        )
        self.iterations = iterations
        self.residual = residual


class SolverStalledError(NonConvergenceError):
    """Exception raised when the line search finds no step that improves h."""

    hint: ClassVar[str] = "the line search found no ascent step; loosen the tolerance"



def _finite(value: float) -> float:
    if not math.isfinite(value):
        msg = "not a finite number"
        raise vol.Invalid(msg)
    return value


_NUMBER = vol.All(vol.Coerce(float), _finite)

PROBLEM_SCHEMA = vol.Schema(
    {
        vol.Required("normals"): vol.All(
            [vol.ExactSequence([_NUMBER, _NUMBER, _NUMBER])], vol.Length(min=1)
        ),
        vol.Required("areas"): vol.All([_NUMBER], vol.Length(min=1)),
    },
    extra=vol.ALLOW_EXTRA,
)


def _readonly(values: ArrayLike, shape: tuple[int, ...]) -> NDArray[np.float64]:
    array = np.array(values, dtype=float).reshape(shape)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class MinkowskiProblem:
    """Unit face normals with the face areas they should carry."""

    normals: NDArray[np.float64]
    target_areas: NDArray[np.float64]

    def __post_init__(self) -> None:
        """Freeze the arrays and check shapes and unit normals."""
        normals = _readonly(self.normals, (-1, 3))
        areas = _readonly(self.target_areas, (-1,))
        if len(normals) != len(areas):
            msg = f"Got {len(normals)} normals but {len(areas)} areas"
            raise ValueError(msg)
        if not (np.all(np.isfinite(normals)) and np.all(np.isfinite(areas))):
            msg = "Normals and areas must be finite"
            raise ValueError(msg)
        lengths = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(lengths - 1.0) > NORMAL_UNIT_TOL):
            msg = "Normals must be unit vectors"
            raise ValueError(msg)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "target_areas", areas)

    @property
    def m(self) -> int:
        """Return the number of faces."""
        return len(self.normals)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> MinkowskiProblem:
        """Build a problem from its JSON form, normalizing the normals."""
        try:
            valid = PROBLEM_SCHEMA(dict(data))
        except vol.Invalid as err:
            raise InvalidProblemError(str(err)) from err
        normals = np.array(valid["normals"], dtype=float)
        areas = np.array(valid["areas"], dtype=float)
        if len(normals) != len(areas):
            reason = f"{len(normals)} normals but {len(areas)} areas"
            raise InvalidProblemError(reason)
        lengths = np.linalg.norm(normals, axis=1)
        if np.any(lengths == 0.0):
            reason = "zero normal vector"
            raise InvalidProblemError(reason)
        off_unit = np.abs(lengths - 1.0) > NORMAL_UNIT_TOL
        if np.any(off_unit):
            LOGGER.warning(
                "Normalizing %d non-unit normals", int(np.count_nonzero(off_unit))
            )
            normals[off_unit] /= lengths[off_unit, None]
        return cls(normals, areas)

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON form."""
        return {
            "normals": [[float(c) for c in row] for row in self.normals],
            "areas": [float(value) for value in self.target_areas],
        }


@dataclass(frozen=True)
class ConditionsReport:
    """Outcome of the three existence conditions."""

    normals_admissible: bool
    areas_positive: bool
    closure: bool
    closure_residual: float
    relative_residual: float

    @property
    def passed(self) -> bool:
        """Return True when every condition holds."""
        return self.normals_admissible and self.areas_positive and self.closure

    def failures(self) -> list[str]:
        """Return the labels of the failed conditions."""
        flags = zip(
            ("(i)", "(ii)", "(iii)"),
            (self.normals_admissible, self.areas_positive, self.closure),
            strict=True,
        )
        return [label for label, holds in flags if not holds]

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-ready form."""
        return {
            "conditions": {
                "(i)": self.normals_admissible,
                "(ii)": self.areas_positive,
                "(iii)": self.closure,
            },
            "closure_residual": self.closure_residual,
            "relative_closure_residual": self.relative_residual,
            "failures": self.failures(),
        }


def _normals_admissible(normals: NDArray[np.float64]) -> bool:
    """Check m >= 4, rank 3 and pairwise distinct directions."""
    if len(normals) < 4:
        return False
    scale = float(np.linalg.norm(normals, 2))
    if np.linalg.matrix_rank(normals, tol=RANK_RTOL * scale) < 3:
        return False
    first, second = np.triu_indices(len(normals), k=1)
    crosses = np.linalg.norm(np.cross(normals[first], normals[second]), axis=1)
    dots = np.einsum("ij,ij->i", normals[first], normals[second])
    return bool(np.all(np.arctan2(crosses, dots) > MIN_NORMAL_ANGLE))


def check_conditions(
    p: MinkowskiProblem, eps_closure: float = EPS_CLOSURE
) -> ConditionsReport:
    """Evaluate non-coplanarity, positivity and closure without raising."""
    residual = area_closure_residual(p.normals, p.target_areas)
    relative = relative_closure_residual(p.normals, p.target_areas)
    report = ConditionsReport(
        normals_admissible=_normals_admissible(p.normals),
        areas_positive=bool(np.all(p.target_areas > 0.0)),
        closure=relative <= eps_closure,
        closure_residual=residual,
        relative_residual=relative,
    )
    LOGGER.debug("Condition report for %d faces: %s", p.m, report)
    return report


def _measure(
    normals: NDArray[np.float64], h: NDArray[np.float64]
) -> tuple[float, NDArray[np.float64], Polytope]:
    polytope = intersect_arrays(normals, h, check_bounded=False)
    return volume(polytope), halfspace_areas(polytope), polytope


def areas_from_support(normals: ArrayLike, h: ArrayLike) -> NDArray[np.float64]:
    """Return the area of the face with each normal; 0 where no face forms."""
    rows = np.asarray(normals, dtype=float).reshape(-1, 3)
    _, areas, _ = _measure(rows, np.asarray(h, dtype=float).reshape(-1))
    return areas


def support_volume(normals: ArrayLike, h: ArrayLike) -> float:
    """Return the volume of the polytope with support numbers ``h``."""
    rows = np.asarray(normals, dtype=float).reshape(-1, 3)
    volume_value, _, _ = _measure(rows, np.asarray(h, dtype=float).reshape(-1))
    return volume_value


@dataclass(frozen=True, eq=False)
class MinkowskiSolution:
    """Support numbers that realize the target areas, centered at the origin."""

    support: NDArray[np.float64]
    polytope: Polytope
    area_residual: float
    iterations: int
    constraint_drift: float = field(default=0.0)

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-ready form."""
        return {
            "support": [float(value) for value in self.support],
            "area_residual": self.area_residual,
            "iterations": self.iterations,
            "constraint_drift": self.constraint_drift,
            "polytope": polytope_report(self.polytope),
        }


def _scaled_residual(
    areas: NDArray[np.float64], h: NDArray[np.float64], targets: NDArray[np.float64]
) -> float:
    # Areas are homogeneous of degree 2 in h; s^2 = sum F / sum A_k h_k.
    scale2 = targets.sum() / float(areas @ h)
    return float(np.max(np.abs(scale2 * areas - targets) / targets))


def solve(
    p: MinkowskiProblem,
    tol: float = SOLVER_TOL,
    max_iter: int = SOLVER_MAX_ITER,
) -> MinkowskiSolution:
    """Find the polytope with normals ``p.normals`` and areas ``p.target_areas``.

    Raises ConditionsViolatedError when an existence condition fails,
    NonConvergenceError when ``max_iter`` ascent steps do not reach ``tol``
    and SolverStalledError when no step improves h before that.
    """
    report = check_conditions(p)
    if not report.passed:
        raise ConditionsViolatedError(report)
    normals = p.normals
    if not normals_positively_span(normals):
        raise PolytopeUnboundedError(p.m)

    targets = p.target_areas
    weights = targets / targets.sum()
    h = np.full(p.m, 1.0 / weights.sum())
    current, areas, _ = _measure(normals, h)
    drift = 0.0
    residual = _scaled_residual(areas, h, targets)
    iterations = 0
    stalled = False

    while residual > tol and iterations < max_iter:
        gradient = areas - (areas @ weights) / (weights @ weights) * weights
        slope = float(gradient @ gradient)
        step = 1.0
        while step >= MIN_STEP:
            trial = h + step * gradient
            try:
                trial_volume, trial_areas, _ = _measure(normals, trial)
            except PolytopeError:
                step /= 2.0
                continue
            if trial_volume >= current + ARMIJO_SLOPE * step * slope:
                break
            # Volume gains below rounding: accept any step that lowers the residual.
            if abs(trial_volume - current) <= FLAT_RTOL * current:
                level = float(weights @ trial)
                flat = _scaled_residual(trial_areas / level**2, trial / level, targets)
                if flat < residual:
                    break
            step /= 2.0
        else:
            LOGGER.debug("Line search stalled at iteration %d", iterations)
            stalled = True
            break

        iterations += 1
        level = float(weights @ trial)
        drift = max(drift, abs(level - 1.0))
        h = trial / level
        # Degree 3 for volume, degree 2 for areas.
        current = trial_volume / level**3
        areas = trial_areas / level**2
        residual = _scaled_residual(areas, h, targets)
        if iterations % LOG_EVERY == 0:
            LOGGER.debug(
                "Iteration %d: volume %.12g, residual %.3e, step %.3e",
                iterations,
                current,
                residual,
                step,
            )

    if drift > DRIFT_WARNING:
        LOGGER.warning("Constraint drifted by %.3e during the ascent", drift)

    scale = math.sqrt(targets.sum() / float(areas @ h))
    support = scale * h
    _, _, polytope = _measure(normals, support)
    support = support - normals @ polytope.centroid
    _, achieved, polytope = _measure(normals, support)
    area_residual = float(np.max(np.abs(achieved - targets) / targets))
    if area_residual > tol:
        if stalled:
            raise SolverStalledError(iterations, area_residual)
        raise NonConvergenceError(iterations, area_residual)
    LOGGER.debug(
        "Solved %d-face problem in %d iterations, residual %.3e",
        p.m,
        iterations,
        area_residual,
    )
    return MinkowskiSolution(
        support=support,
        polytope=polytope,
        area_residual=area_residual,
        iterations=iterations,
        constraint_drift=drift,
    )
