"""The five-normal polytope family.

Polytopes whose outward face normals are exactly the five canonical normals
sit on a rectangle ABCD (|AB| = 2x along e2, |BC| = 2y along e1) with a roof
of four planes tilted at pi/4. The roof closes in a ridge parallel to BC
(Type I, x < y), an apex (Type II, x = y) or a ridge parallel to AB
(Type III, x > y). This module builds them, maps (x, y) to face perimeters
and back, and decides whether a perimeter 5-tuple is realized by the family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from typing import TYPE_CHECKING, Any, NamedTuple

import numpy as np

from .const import EPS_CLASS, LOGGER
from .geometry_core import intersect_arrays

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

    from numpy.typing import NDArray

    from .geometry_core import Polytope

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
# Boundary slope of the Type I and Type III angles: beta > WEDGE * alpha.
WEDGE = 3.0 + 2.0 * SQRT3
# L1 = RIDGE * L2 + L4 on the Type I plane.
RIDGE = 2.0 * SQRT3 - 3.0
# L1 = APEX * L2 on the Type II ray.
APEX = 2.0 * (SQRT3 - 1.0)

_HALF = 1.0 / SQRT2
_NORMALS = np.array(
    [
        [0.0, 0.0, -1.0],
        [_HALF, 0.0, _HALF],
        [-_HALF, 0.0, _HALF],
        [0.0, _HALF, _HALF],
        [0.0, -_HALF, _HALF],
    ]
)
_NORMALS.flags.writeable = False


class FamilyError(ValueError):
    """Exception to indicate an input the family cannot handle."""


class InvalidParamsError(FamilyError):
    """Exception raised when the half side lengths are not positive."""

    def __init__(self, x: float, y: float) -> None:
        """Initialize InvalidParamsError with the rejected parameters."""
        super().__init__(
            f"Family parameters need x > 0 and y > 0 (finite), got x={x}, y={y}"
        )


class NotInFamilyError(FamilyError):
    """Exception raised when no family polytope has the given perimeters."""

    def __init__(self, perimeters: PerimeterVector) -> None:
        """Initialize NotInFamilyError with the rejected perimeters."""
        super().__init__(
            f"Perimeters {perimeters.to_list()} are not realized by the family"
        )


class NotInPlaneError(FamilyError):
    """Exception raised when a vector is too far from a perimeter plane."""

    def __init__(self, plane: PerimeterPlane, residual: float) -> None:
        """Initialize NotInPlaneError with the plane and the residual."""
        super().__init__(f"Vector is not in {plane} (residual {residual:.3e})")


class Verdict(StrEnum):
    """Membership verdict for a perimeter 5-tuple."""

    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    TYPE_III = "TypeIII"
    NOT_MEMBER = "NotMember"

    @property
    def is_member(self) -> bool:
        """Return True for the three polytope types."""
        return self is not Verdict.NOT_MEMBER


class PerimeterPlane(StrEnum):
    """The two 2-planes of R^5 that carry the Type I and Type III angles."""

    LAMBDA_I = "LambdaI"
    LAMBDA_III = "LambdaIII"


@dataclass(frozen=True)
class PerimeterVector:
    """Face perimeters (L1, ..., L5), ordered like the canonical normals."""

    L1: float
    L2: float
    L3: float
    L4: float
    L5: float

    def __post_init__(self) -> None:
        """Coerce to floats and reject non-finite components."""
        for name in ("L1", "L2", "L3", "L4", "L5"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                msg = f"Perimeter {name} must be finite, got {value}"
                raise ValueError(msg)
            object.__setattr__(self, name, value)

    @classmethod
    def from_sequence(cls, values: Iterable[float]) -> PerimeterVector:
        """Build from exactly five numbers."""
        items = [float(value) for value in values]
        if len(items) != 5:
            msg = f"A perimeter vector has 5 components, got {len(items)}"
            raise ValueError(msg)
        return cls(*items)

    def as_array(self) -> NDArray[np.float64]:
        """Return the components as a numpy vector."""
        return np.array([self.L1, self.L2, self.L3, self.L4, self.L5])

    def to_list(self) -> list[float]:
        """Return the components as a list."""
        return [self.L1, self.L2, self.L3, self.L4, self.L5]

    def __iter__(self) -> Iterator[float]:
        """Iterate over the components."""
        return iter(self.to_list())

    def __add__(self, other: PerimeterVector) -> PerimeterVector:
        """Add componentwise."""
        return PerimeterVector.from_sequence(self.as_array() + other.as_array())

    def __sub__(self, other: PerimeterVector) -> PerimeterVector:
        """Subtract componentwise."""
        return PerimeterVector.from_sequence(self.as_array() - other.as_array())

    def __mul__(self, factor: float) -> PerimeterVector:
        """Scale by a real number."""
        return PerimeterVector.from_sequence(self.as_array() * float(factor))

    __rmul__ = __mul__


@dataclass(frozen=True)
class FamilyParams:
    """Half side lengths of the base rectangle and its placement."""

    x: float
    y: float
    base_center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        """Reject non-positive or non-finite half lengths."""
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)) or x <= 0.0 or y <= 0.0:
            raise InvalidParamsError(x, y)
        center = tuple(float(c) for c in self.base_center)
        if len(center) != 3 or not all(math.isfinite(c) for c in center):
            msg = f"base_center must be three finite numbers, got {self.base_center}"
            raise ValueError(msg)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "base_center", center)


@dataclass(frozen=True)
class FamilyClassification:
    """Verdict plus basis coefficients and the distance to the constraints."""

    verdict: Verdict
    coeffs: tuple[float, float] | None
    residual: float

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-ready form."""
        return {
            "verdict": str(self.verdict),
            "coeffs": list(self.coeffs) if self.coeffs is not None else None,
            "residual": self.residual,
        }


class TypeCondition(NamedTuple):
    """One lemma's condition set evaluated on a perimeter vector."""

    residual: float
    holds: bool


@dataclass(frozen=True)
class BasisVectors:
    """The constants v_I, v_II, v_III spanning the perimeter planes."""

    v_i: PerimeterVector
    v_ii: PerimeterVector
    v_iii: PerimeterVector

    def as_matrix(self) -> NDArray[np.float64]:
        """Return the 3x5 matrix with rows v_I, v_II, v_III."""
        rows = (self.v_i, self.v_ii, self.v_iii)
        return np.vstack([vector.as_array() for vector in rows])


_BASIS = BasisVectors(
    v_i=PerimeterVector(2.0, -WEDGE, -WEDGE, 5.0, 5.0),
    v_ii=PerimeterVector(APEX, 1.0, 1.0, 1.0, 1.0),
    v_iii=PerimeterVector(2.0, 5.0, 5.0, -WEDGE, -WEDGE),
)


def canonical_normals() -> NDArray[np.float64]:
    """Return the five canonical unit normals as rows, n1 first."""
    return _NORMALS.copy()


def basis_vectors() -> BasisVectors:
    """Return v_I, v_II and v_III."""
    return _BASIS


def quarter_turn(perimeters: PerimeterVector) -> PerimeterVector:
    """Swap components (2, 3) with (4, 5).

    On family members (L2 = L3, L4 = L5) this is the action of rotating the
    polytope by pi/2 about e3, which exchanges Types I and III.
    """
    return PerimeterVector(
        perimeters.L1, perimeters.L4, perimeters.L5, perimeters.L2, perimeters.L3
    )


def support_numbers(p: FamilyParams) -> NDArray[np.float64]:
    """Return the offsets of the five planes through the base edges."""
    reach = np.array([0.0, p.y, p.y, p.x, p.x]) / SQRT2
    return _NORMALS @ np.asarray(p.base_center) + reach


def build_polytope(p: FamilyParams) -> Polytope:
    """Build the family polytope on the base rectangle of ``p``."""
    polytope = intersect_arrays(_NORMALS, support_numbers(p))
    LOGGER.debug(
        "Built family polytope x=%s y=%s: %d vertices",
        p.x,
        p.y,
        len(polytope.vertices),
    )
    return polytope


def _roof(short: float, long: float) -> tuple[float, float, float, float, float]:
    """Perimeters when the ridge runs along the long base edge (short <= long)."""
    slope = 2.0 * (1.0 + SQRT3) * short
    trapezoid = APEX * short + 4.0 * long
    return 4.0 * short + 4.0 * long, slope, slope, trapezoid, trapezoid


def perimeters_from_xy(p: FamilyParams) -> PerimeterVector:
    """Return the face perimeters of ``build_polytope(p)`` in closed form."""
    if p.x <= p.y:
        return PerimeterVector(*_roof(p.x, p.y))
    return quarter_turn(PerimeterVector(*_roof(p.y, p.x)))


def areas_from_xy(p: FamilyParams) -> NDArray[np.float64]:
    """Return the face areas of ``build_polytope(p)`` in closed form."""
    short, long = min(p.x, p.y), max(p.x, p.y)
    triangle = SQRT2 * short * short
    trapezoid = SQRT2 * short * (2.0 * long - short)
    base = 4.0 * p.x * p.y
    if p.x <= p.y:
        return np.array([base, triangle, triangle, trapezoid, trapezoid])
    return np.array([base, trapezoid, trapezoid, triangle, triangle])


def volume_from_xy(p: FamilyParams) -> float:
    """Return the volume of ``build_polytope(p)`` in closed form."""
    short, long = min(p.x, p.y), max(p.x, p.y)
    # Horizontal slices at height z are (2 long - 2z) x (2 short - 2z).
    return 2.0 * short * short * long - 2.0 * short**3 / 3.0


def _roof_params(perimeters: PerimeterVector) -> tuple[float, float]:
    x = perimeters.L2 * (SQRT3 - 1.0) / 4.0
    y = perimeters.L2 * (SQRT3 - 2.0) / 4.0 + perimeters.L4 / 4.0
    return x, y


def type_conditions(
    perimeters: PerimeterVector, tol: float = EPS_CLASS
) -> dict[Verdict, TypeCondition]:
    """Evaluate the Type I, II and III condition sets separately.

    Equalities are measured relative to max(|L_k|, 1); strict inequalities
    need a margin above ``tol`` on the same scale.
    """
    l1, l2, l3, l4, l5 = perimeters
    scale = max(abs(l1), abs(l2), abs(l3), abs(l4), abs(l5), 1.0)
    band = tol * scale
    pairs = max(abs(l2 - l3), abs(l4 - l5))

    residual_i = max(pairs, abs(l1 - RIDGE * l2 - l4)) / scale
    residual_ii = max(pairs, abs(l1 - APEX * l2), abs(l2 - l4)) / scale
    residual_iii = max(pairs, abs(l1 - l2 - RIDGE * l4)) / scale
    return {
        Verdict.TYPE_II: TypeCondition(
            residual_ii, residual_ii <= tol and l2 > band
        ),
        Verdict.TYPE_I: TypeCondition(
            residual_i, residual_i <= tol and l4 - l2 > band and l2 > band
        ),
        Verdict.TYPE_III: TypeCondition(
            residual_iii, residual_iii <= tol and l2 - l4 > band and l4 > band
        ),
    }


def _project(
    perimeters: PerimeterVector, plane: PerimeterPlane
) -> tuple[tuple[float, float], float]:
    first_vector = _BASIS.v_i if plane is PerimeterPlane.LAMBDA_I else _BASIS.v_iii
    first = first_vector.as_array()
    second = _BASIS.v_ii.as_array()
    values = perimeters.as_array()
    # The pairs (v_I, v_II) and (v_III, v_II) are orthogonal.
    a = float(values @ first / (first @ first))
    b = float(values @ second / (second @ second))
    rebuilt = a * first + b * second
    residual = float(
        np.linalg.norm(values - rebuilt) / max(np.linalg.norm(values), 1.0)
    )
    return (a, b), residual


def decompose(
    perimeters: PerimeterVector, plane: PerimeterPlane, tol: float = EPS_CLASS
) -> tuple[float, float]:
    """Return (alpha, beta) on LambdaI or (delta, epsilon) on LambdaIII.

    The first coefficient multiplies v_I (or v_III), the second v_II.
    """
    coeffs, residual = _project(perimeters, plane)
    if residual > tol:
        raise NotInPlaneError(plane, residual)
    return coeffs


def _coefficients(
    perimeters: PerimeterVector, verdict: Verdict
) -> tuple[float, float]:
    if verdict is Verdict.TYPE_II:
        second = _BASIS.v_ii.as_array()
        return float(perimeters.as_array() @ second / (second @ second)), 0.0
    plane = PerimeterPlane.LAMBDA_III
    if verdict is Verdict.TYPE_I:
        plane = PerimeterPlane.LAMBDA_I
    coeffs, _ = _project(perimeters, plane)
    return coeffs


def classify(
    perimeters: PerimeterVector, tol: float = EPS_CLASS
) -> FamilyClassification:
    """Decide which family type, if any, realizes ``perimeters``.

    Type II is tested first so that points inside the tolerance band around
    the shared ray are attributed to it.
    """
    conditions = type_conditions(perimeters, tol)
    for verdict in (Verdict.TYPE_II, Verdict.TYPE_I, Verdict.TYPE_III):
        condition = conditions[verdict]
        if condition.holds:
            LOGGER.debug(
                "Classified %s as %s (residual %.3e)",
                perimeters.to_list(),
                verdict,
                condition.residual,
            )
            return FamilyClassification(
                verdict=verdict,
                coeffs=_coefficients(perimeters, verdict),
                residual=condition.residual,
            )
    residual = min(condition.residual for condition in conditions.values())
    return FamilyClassification(
        verdict=Verdict.NOT_MEMBER, coeffs=None, residual=residual
    )


def xy_from_perimeters(
    perimeters: PerimeterVector, tol: float = EPS_CLASS
) -> FamilyParams:
    """Recover (x, y) from the perimeters of a family member."""
    verdict = classify(perimeters, tol).verdict
    if not verdict.is_member:
        raise NotInFamilyError(perimeters)
    if verdict is Verdict.TYPE_III:
        short, long = _roof_params(quarter_turn(perimeters))
        return FamilyParams(x=long, y=short)
    x, y = _roof_params(perimeters)
    return FamilyParams(x=x, y=y)
