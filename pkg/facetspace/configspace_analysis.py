"""Structure of the perimeter configuration space of the five-normal family.

The members split into two 2-dimensional angles (Types I and III) glued
along the Type II ray. The helpers here measure that picture numerically:
subspace intersections, line probes that count half-branches at a point,
a non-convexity witness, and the closure residual that characterizes the
area configuration space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.linalg import null_space, orth

from .const import (
    EPS_CLASS,
    LOGGER,
    MIN_DIRECTION_NORM,
    PROBE_MIN_STEPS,
    PROBE_RADIUS,
    PROBE_STEPS,
    RANK_RTOL,
    WITNESS_STEP,
)
from .family5 import (
    FamilyClassification,
    PerimeterVector,
    Verdict,
    basis_vectors,
    classify,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import ArrayLike, NDArray


class DegenerateDirectionError(ValueError):
    """Exception raised when a probe direction is numerically zero."""

    def __init__(self, norm: float) -> None:
        """Initialize DegenerateDirectionError with the direction norm."""
        super().__init__(
            f"Probe direction has norm {norm:.3e} < {MIN_DIRECTION_NORM:.0e}"
        )


class InvalidProbeError(ValueError):
    """Exception raised for a probe radius or step count out of range."""

    def __init__(self, reason: str) -> None:
        """Initialize InvalidProbeError with the violated condition."""
        super().__init__(f"Invalid probe parameters: {reason}")


def _orient(vector: NDArray[np.float64]) -> NDArray[np.float64]:
    # Largest-magnitude component positive, so generators print the same way.
    return vector if vector[int(np.argmax(np.abs(vector)))] >= 0 else -vector


@dataclass(frozen=True)
class SubspaceBasis:
    """Linearly independent vectors spanning a subspace of R^5."""

    vectors: tuple[PerimeterVector, ...]
    dim: int = field(init=False)

    def __post_init__(self) -> None:
        """Check independence and record the dimension."""
        vectors = tuple(self.vectors)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "dim", len(vectors))
        if not vectors:
            return
        singular = np.linalg.svd(self.as_matrix(), compute_uv=False)
        if len(vectors) > len(singular) or singular[-1] <= RANK_RTOL * singular[0]:
            msg = f"{len(vectors)} vectors are not linearly independent"
            raise ValueError(msg)

    @classmethod
    def span(cls, *vectors: PerimeterVector) -> SubspaceBasis:
        """Build the basis of span(vectors)."""
        return cls(tuple(vectors))

    def as_matrix(self) -> NDArray[np.float64]:
        """Return the basis as rows of a (dim, 5) matrix."""
        if not self.vectors:
            return np.zeros((0, 5))
        return np.vstack([vector.as_array() for vector in self.vectors])

    def cosine_to(self, vector: PerimeterVector) -> float:
        """Return |cos| of the angle between ``vector`` and the subspace."""
        values = vector.as_array()
        if not self.vectors:
            return 0.0
        frame = orth(self.as_matrix().T)
        return float(np.linalg.norm(frame.T @ values) / np.linalg.norm(values))


def lambda_one() -> SubspaceBasis:
    """Return span(v_I, v_II), the plane carrying the Type I angle."""
    basis = basis_vectors()
    return SubspaceBasis.span(basis.v_i, basis.v_ii)


def lambda_two() -> SubspaceBasis:
    """Return span(v_II), the line carrying the Type II ray."""
    return SubspaceBasis.span(basis_vectors().v_ii)


def lambda_three() -> SubspaceBasis:
    """Return span(v_III, v_II), the plane carrying the Type III angle."""
    basis = basis_vectors()
    return SubspaceBasis.span(basis.v_iii, basis.v_ii)


def subspace_intersection(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    """Return an orthonormal basis of the intersection of two subspaces.

    Solves A^T c = B^T d through the null space of [A^T, -B^T]; singular
    values below RANK_RTOL times the largest one count as zero.
    """
    if a.dim == 0 or b.dim == 0:
        return SubspaceBasis(())
    stacked = np.hstack([a.as_matrix().T, -b.as_matrix().T])
    kernel = null_space(stacked, rcond=RANK_RTOL)
    if kernel.shape[1] == 0:
        return SubspaceBasis(())
    common = a.as_matrix().T @ kernel[: a.dim]
    frame = orth(common, rcond=RANK_RTOL)
    LOGGER.debug(
        "Intersected subspaces of dim %d and %d: dim %d", a.dim, b.dim, frame.shape[1]
    )
    return SubspaceBasis(
        tuple(PerimeterVector.from_sequence(_orient(column)) for column in frame.T)
    )


def minor_check(columns: Sequence[int] = (0, 2, 4)) -> float:
    """Return the determinant of the chosen columns of (v_I; v_II; v_III).

    Columns are 0-based; the default picks the first, third and fifth.
    """
    picked = [int(column) for column in columns]
    if len(picked) != 3 or not all(0 <= column < 5 for column in picked):
        msg = f"Need three column indices in [0, 4], got {list(columns)}"
        raise ValueError(msg)
    return float(np.linalg.det(basis_vectors().as_matrix()[:, picked]))


def stacked_rank() -> int:
    """Return the numerical rank of (v_I; v_II; v_III)."""
    matrix = basis_vectors().as_matrix()
    return int(np.linalg.matrix_rank(matrix, tol=RANK_RTOL * np.linalg.norm(matrix, 2)))


class Side(StrEnum):
    """Side of t = 0 on a probe line."""

    NEGATIVE = "negative"
    POSITIVE = "positive"


@dataclass(frozen=True)
class ProbeSample:
    """Classification of center + t * direction."""

    t: float
    classification: FamilyClassification

    @property
    def member(self) -> bool:
        """Return True when the sample lies in the configuration space."""
        return self.classification.verdict.is_member

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-ready form."""
        return {
            "t": self.t,
            "verdict": str(self.classification.verdict),
            "residual": self.classification.residual,
        }


@dataclass(frozen=True)
class BranchInterval:
    """Run of samples with equal membership on one side of t = 0."""

    side: Side
    start: float
    end: float
    member: bool

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-ready form."""
        return {
            "side": str(self.side),
            "start": self.start,
            "end": self.end,
            "member": self.member,
        }


@dataclass(frozen=True)
class ProbeReport:
    """Samples along a line through ``center`` and the half-branches found."""

    center: PerimeterVector
    direction: PerimeterVector
    radius: float
    steps: int
    samples: tuple[ProbeSample, ...]
    half_branch_count: int
    branch_intervals: tuple[BranchInterval, ...]

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-ready form."""
        return {
            "center": self.center.to_list(),
            "direction": self.direction.to_list(),
            "radius": self.radius,
            "steps": self.steps,
            "samples": [sample.to_dict() for sample in self.samples],
            "half_branch_count": self.half_branch_count,
            "branch_intervals": [
                interval.to_dict() for interval in self.branch_intervals
            ],
        }

    def csv_rows(self) -> list[tuple[float, int, str]]:
        """Return (t, member, type) rows for plotting."""
        return [
            (sample.t, int(sample.member), str(sample.classification.verdict))
            for sample in self.samples
        ]


def _runs(side: Side, samples: Sequence[ProbeSample]) -> list[BranchInterval]:
    """Group samples ordered outward from t = 0 into membership runs."""
    runs: list[BranchInterval] = []
    if not samples:
        return runs
    first = samples[0]
    for previous, sample in zip(samples, [*samples[1:], None], strict=True):
        if sample is not None and sample.member == first.member:
            continue
        low, high = sorted((first.t, previous.t))
        runs.append(BranchInterval(side, low, high, first.member))
        if sample is not None:
            first = sample
    return runs


def probe_line(
    center: PerimeterVector,
    direction: PerimeterVector,
    radius: float = PROBE_RADIUS,
    steps: int = PROBE_STEPS,
    tol: float = EPS_CLASS,
) -> ProbeReport:
    """Classify points center + t * direction for t in [-radius, radius].

    Samples sit at t = radius * i / steps for 0 < |i| <= steps. A side of
    t = 0 counts as a half-branch when its innermost sample is a member.
    """
    if not math.isfinite(radius) or radius <= 0.0:
        raise InvalidProbeError(f"radius must be > 0, got {radius}")
    if int(steps) != steps or steps < PROBE_MIN_STEPS:
        raise InvalidProbeError(f"steps must be an integer >= {PROBE_MIN_STEPS}")
    norm = float(np.linalg.norm(direction.as_array()))
    if norm < MIN_DIRECTION_NORM:
        raise DegenerateDirectionError(norm)

    offsets = np.arange(1, int(steps) + 1) * (radius / steps)
    positive = [
        ProbeSample(float(t), classify(center + direction * t, tol)) for t in offsets
    ]
    negative = [
        ProbeSample(float(-t), classify(center + direction * -t, tol)) for t in offsets
    ]
    half_branches = int(positive[0].member) + int(negative[0].member)
    intervals = _runs(Side.NEGATIVE, negative) + _runs(Side.POSITIVE, positive)
    LOGGER.debug(
        "Probe at %s along %s: %d half-branches",
        center.to_list(),
        direction.to_list(),
        half_branches,
    )
    return ProbeReport(
        center=center,
        direction=direction,
        radius=float(radius),
        steps=int(steps),
        samples=(*reversed(negative), *positive),
        half_branch_count=half_branches,
        branch_intervals=tuple(intervals),
    )


@dataclass(frozen=True)
class ConvexityWitness:
    """Two members whose midpoint is not a member."""

    p1: PerimeterVector
    p2: PerimeterVector
    mid: PerimeterVector
    verdicts: tuple[FamilyClassification, FamilyClassification, FamilyClassification]

    @property
    def demonstrates_nonconvexity(self) -> bool:
        """Return True for the verdicts TypeI, TypeIII, NotMember."""
        expected = (Verdict.TYPE_I, Verdict.TYPE_III, Verdict.NOT_MEMBER)
        return tuple(result.verdict for result in self.verdicts) == expected

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-ready form."""
        return {
            "p1": self.p1.to_list(),
            "p2": self.p2.to_list(),
            "mid": self.mid.to_list(),
            "verdicts": [result.to_dict() for result in self.verdicts],
            "demonstrates_nonconvexity": self.demonstrates_nonconvexity,
        }


def convexity_witness(
    step: float = WITNESS_STEP, tol: float = EPS_CLASS
) -> ConvexityWitness:
    """Build p1 = v_II + step * v_I, p2 = v_II + step * v_III and their midpoint."""
    if not math.isfinite(step) or step <= 0.0:
        msg = f"Witness step must be > 0, got {step}"
        raise ValueError(msg)
    basis = basis_vectors()
    p1 = basis.v_ii + basis.v_i * step
    p2 = basis.v_ii + basis.v_iii * step
    mid = (p1 + p2) * 0.5
    verdicts = (classify(p1, tol), classify(p2, tol), classify(mid, tol))
    witness = ConvexityWitness(p1=p1, p2=p2, mid=mid, verdicts=verdicts)
    if not witness.demonstrates_nonconvexity:
        LOGGER.warning(
            "Step %s gives verdicts %s, not TypeI/TypeIII/NotMember",
            step,
            [str(result.verdict) for result in verdicts],
        )
    return witness


def area_closure_residual(normals: ArrayLike, areas: ArrayLike) -> float:
    """Return |sum_k F_k n_k|^2, zero exactly when the areas close."""
    rows = np.asarray(normals, dtype=float).reshape(-1, 3)
    values = np.asarray(areas, dtype=float).reshape(-1)
    if len(rows) != len(values):
        msg = f"Got {len(rows)} normals but {len(values)} areas"
        raise ValueError(msg)
    total = values @ rows
    return float(total @ total)


def relative_closure_residual(normals: ArrayLike, areas: ArrayLike) -> float:
    """Return the closure residual divided by (sum_k |F_k|)^2."""
    scale = float(np.abs(np.asarray(areas, dtype=float)).sum()) ** 2
    residual = area_closure_residual(normals, areas)
    return residual / scale if scale > 0.0 else residual
