"""Halfspace polytope kernel: vertices, faces, perimeters, areas and volume."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import cdist, pdist

from .const import EPS_GEOM, LOGGER, SIGNIFICANT_DIGITS

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import ArrayLike, NDArray

UNIT_TOL = 1e-12
_SINGULAR_DET = 1e-12
_ROUGH_RTOL = 1e-6
_TINY = 1e-300


class PolytopeError(Exception):
    """Exception to indicate a general polytope construction error."""


class PolytopeInfeasibleError(PolytopeError):
    """Exception raised when the halfspaces have an empty intersection."""

    def __init__(self, count: int) -> None:
        """Initialize PolytopeInfeasibleError with the halfspace count."""
        super().__init__(f"Intersection of {count} halfspaces is empty")


class PolytopeUnboundedError(PolytopeError):
    """Exception raised when the intersection has a recession direction."""

    def __init__(self, count: int) -> None:
        """Initialize PolytopeUnboundedError with the halfspace count."""
        super().__init__(
            f"Normals of {count} halfspaces do not positively span R^3; "
            "the intersection is unbounded"
        )


class PolytopeDegenerateError(PolytopeError):
    """Exception raised when the intersection is not full-dimensional."""

    def __init__(self, dimension: int) -> None:
        """Initialize PolytopeDegenerateError with the affine dimension found."""
        super().__init__(f"Intersection has affine dimension {dimension} < 3")


def _frozen(values: ArrayLike, shape: tuple[int, ...]) -> NDArray[np.float64]:
    array = np.array(values, dtype=float).reshape(shape)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """Halfspace {p : <p, normal> <= offset} with a unit outward normal."""

    normal: NDArray[np.float64]
    offset: float

    def __post_init__(self) -> None:
        """Validate and freeze the normal."""
        normal = _frozen(self.normal, (3,))
        if not np.all(np.isfinite(normal)) or not np.isfinite(self.offset):
            msg = f"Halfspace must be finite, got {normal} <= {self.offset}"
            raise ValueError(msg)
        if abs(np.linalg.norm(normal) - 1.0) > UNIT_TOL:
            msg = f"Halfspace normal must be a unit vector, got {normal}"
            raise ValueError(msg)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_normal(cls, normal: ArrayLike, offset: float) -> HalfSpace:
        """Build a halfspace from any non-zero normal, rescaling the offset."""
        vector = np.asarray(normal, dtype=float).reshape(3)
        norm = float(np.linalg.norm(vector))
        if norm == 0.0 or not np.isfinite(norm):
            msg = f"Cannot normalize normal {vector}"
            raise ValueError(msg)
        if abs(norm - 1.0) <= UNIT_TOL:
            return cls(vector, float(offset))
        return cls(vector / norm, float(offset) / norm)

    def translated(self, shift: ArrayLike) -> HalfSpace:
        """Return the halfspace moved by ``shift``."""
        return HalfSpace(self.normal, self.offset + float(self.normal @ shift))


def halfspaces_from_arrays(
    normals: ArrayLike, offsets: ArrayLike
) -> tuple[HalfSpace, ...]:
    """Pair rows of ``normals`` with ``offsets``."""
    rows = np.asarray(normals, dtype=float).reshape(-1, 3)
    values = np.asarray(offsets, dtype=float).reshape(-1)
    if len(rows) != len(values):
        msg = f"Got {len(rows)} normals but {len(values)} offsets"
        raise ValueError(msg)
    return tuple(
        HalfSpace.from_normal(row, value)
        for row, value in zip(rows, values, strict=True)
    )


def _cycle_perimeter(cycle: NDArray[np.float64]) -> float:
    edges = np.roll(cycle, -1, axis=0) - cycle
    return float(np.linalg.norm(edges, axis=1).sum())


def _cycle_area(cycle: NDArray[np.float64], normal: NDArray[np.float64]) -> float:
    # Shoelace in the face plane: sum of (p_i x p_i+1) projected on the normal.
    local = cycle - cycle.mean(axis=0)
    crosses = np.cross(local, np.roll(local, -1, axis=0))
    return float(abs(crosses.sum(axis=0) @ normal) / 2.0)


@dataclass(frozen=True, eq=False)
class Face:
    """Planar face: vertex cycle counterclockwise seen from outside."""

    normal: NDArray[np.float64]
    vertices: NDArray[np.float64]
    vertex_indices: tuple[int, ...]
    halfspace_index: int
    perimeter: float = field(init=False)
    area: float = field(init=False)

    def __post_init__(self) -> None:
        """Freeze arrays and measure the cycle."""
        normal = _frozen(self.normal, (3,))
        cycle = _frozen(self.vertices, (-1, 3))
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "vertices", cycle)
        object.__setattr__(self, "perimeter", _cycle_perimeter(cycle))
        object.__setattr__(self, "area", _cycle_area(cycle, normal))


@dataclass(frozen=True, eq=False)
class Polytope:
    """Bounded convex body held as halfspaces plus derived vertices and faces."""

    halfspaces: tuple[HalfSpace, ...]
    vertices: NDArray[np.float64]
    faces: tuple[Face, ...]

    @property
    def centroid(self) -> NDArray[np.float64]:
        """Return the vertex mean."""
        return self.vertices.mean(axis=0)

    @property
    def diameter(self) -> float:
        """Return the largest distance between two vertices."""
        return float(pdist(self.vertices).max())

    @property
    def n_edges(self) -> int:
        """Return the edge count (every edge borders two faces)."""
        return sum(len(face.vertex_indices) for face in self.faces) // 2

    @property
    def euler_characteristic(self) -> int:
        """Return V - E + F."""
        return len(self.vertices) - self.n_edges + len(self.faces)

    def face_for_normal(self, normal: ArrayLike, tol: float = UNIT_TOL) -> Face | None:
        """Return the face with the given outward normal, if there is one."""
        target = np.asarray(normal, dtype=float)
        for face in self.faces:
            if np.allclose(face.normal, target, rtol=0.0, atol=tol):
                return face
        return None

    def supporting_halfspaces(self) -> tuple[HalfSpace, ...]:
        """Return the halfspaces that carry a 2-face."""
        return tuple(self.halfspaces[face.halfspace_index] for face in self.faces)

    def support_numbers(self, normals: ArrayLike) -> NDArray[np.float64]:
        """Return max <p, n> over the polytope for every row of ``normals``."""
        rows = np.asarray(normals, dtype=float).reshape(-1, 3)
        return (self.vertices @ rows.T).max(axis=0)

    def translated(self, shift: ArrayLike) -> Polytope:
        """Return the polytope moved by ``shift``."""
        return intersect_halfspaces([hs.translated(shift) for hs in self.halfspaces])


def normals_positively_span(normals: ArrayLike, tol: float = EPS_GEOM) -> bool:
    """Check that the origin lies strictly inside the hull of the normals."""
    points = np.asarray(normals, dtype=float).reshape(-1, 3)
    if len(points) < 4:
        return False
    try:
        hull = ConvexHull(points)
    except QhullError:
        # Coplanar normals leave a recession direction along their plane normal.
        return False
    return bool(np.all(hull.equations[:, 3] < -tol))


def _affine_dimension(points: NDArray[np.float64], tol: float) -> int:
    if len(points) <= 1:
        return 0
    return int(np.linalg.matrix_rank(points - points[0], tol=tol))


def _merge_close(points: NDArray[np.float64], tol: float) -> NDArray[np.float64]:
    merged: list[NDArray[np.float64]] = []
    for point in points:
        if not any(np.linalg.norm(point - kept) <= tol for kept in merged):
            merged.append(point)
    return np.array(merged).reshape(-1, 3)


def _enumerate_vertices(
    normals: NDArray[np.float64], offsets: NDArray[np.float64], tol: float
) -> tuple[NDArray[np.float64], float]:
    """Solve every normal triple and keep the feasible, deduplicated points."""
    empty = np.empty((0, 3))
    triples = np.array(list(combinations(range(len(normals)), 3)))
    if len(triples) == 0:
        return empty, 0.0
    systems = normals[triples]
    solvable = np.abs(np.linalg.det(systems)) > _SINGULAR_DET
    if not solvable.any():
        return empty, 0.0
    rhs = offsets[triples[solvable]]
    candidates = np.linalg.solve(systems[solvable], rhs[..., None])[..., 0]
    violation = (candidates @ normals.T - offsets).max(axis=1)

    rough = violation <= _ROUGH_RTOL * (1.0 + np.linalg.norm(candidates, axis=1))
    if not rough.any():
        return empty, 0.0
    kept = candidates[rough]
    scale = float(np.linalg.norm(kept.max(axis=0) - kept.min(axis=0)))
    tol_abs = tol * max(scale, _TINY)
    feasible = candidates[violation <= tol_abs]
    return _merge_close(feasible, tol_abs), tol_abs


def _plane_basis(
    normal: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    axis = np.eye(3)[int(np.argmin(np.abs(normal)))]
    u = axis - (axis @ normal) * normal
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def _face_cycle(
    vertices: NDArray[np.float64], active: NDArray[np.intp], normal: NDArray[np.float64]
) -> tuple[int, ...]:
    points = vertices[active]
    local = points - points.mean(axis=0)
    u, v = _plane_basis(normal)
    angles = np.arctan2(local @ v, local @ u)
    return tuple(int(i) for i in active[np.argsort(angles, kind="stable")])


def _extract_faces(
    vertices: NDArray[np.float64],
    normals: NDArray[np.float64],
    offsets: NDArray[np.float64],
    tol_abs: float,
) -> tuple[Face, ...]:
    gaps = offsets[None, :] - vertices @ normals.T
    faces: list[Face] = []
    for index, normal in enumerate(normals):
        active = np.flatnonzero(np.abs(gaps[:, index]) <= tol_abs)
        if len(active) < 3 or _affine_dimension(vertices[active], tol_abs) < 2:
            continue
        if any(np.allclose(face.normal, normal, atol=UNIT_TOL) for face in faces):
            continue
        cycle = _face_cycle(vertices, active, normal)
        faces.append(
            Face(
                normal=normal,
                vertices=vertices[list(cycle)],
                vertex_indices=cycle,
                halfspace_index=index,
            )
        )
    return tuple(faces)


def intersect_arrays(
    normals: ArrayLike,
    offsets: ArrayLike,
    *,
    tol: float = EPS_GEOM,
    check_bounded: bool = True,
) -> Polytope:
    """Intersect halfspaces given as a normal matrix and an offset vector."""
    halfspaces = halfspaces_from_arrays(normals, offsets)
    rows = np.array([hs.normal for hs in halfspaces]).reshape(-1, 3)
    values = np.array([hs.offset for hs in halfspaces])
    if check_bounded and not normals_positively_span(rows, tol):
        raise PolytopeUnboundedError(len(halfspaces))

    vertices, tol_abs = _enumerate_vertices(rows, values, tol)
    if len(vertices) == 0:
        raise PolytopeInfeasibleError(len(halfspaces))
    dimension = _affine_dimension(vertices, tol_abs)
    if dimension < 3:
        raise PolytopeDegenerateError(dimension)

    vertices.flags.writeable = False
    faces = _extract_faces(vertices, rows, values, tol_abs)
    LOGGER.debug(
        "Intersected %d halfspaces: %d vertices, %d faces",
        len(halfspaces),
        len(vertices),
        len(faces),
    )
    return Polytope(halfspaces=halfspaces, vertices=vertices, faces=faces)


def intersect_halfspaces(
    hs: Sequence[HalfSpace], tol: float = EPS_GEOM
) -> Polytope:
    """Intersect halfspaces into a bounded, full-dimensional polytope."""
    normals = np.array([h.normal for h in hs]).reshape(-1, 3)
    offsets = np.array([h.offset for h in hs], dtype=float)
    return intersect_arrays(normals, offsets, tol=tol)


def face_perimeter(face: Face) -> float:
    """Return the sum of edge lengths of the face cycle."""
    return _cycle_perimeter(face.vertices)


def face_area(face: Face) -> float:
    """Return the planar area of the face cycle."""
    return _cycle_area(face.vertices, face.normal)


def halfspace_areas(polytope: Polytope) -> NDArray[np.float64]:
    """Return the face area per input halfspace; 0 where no 2-face forms."""
    areas = np.zeros(len(polytope.halfspaces))
    for face in polytope.faces:
        areas[face.halfspace_index] = face.area
    return areas


def halfspace_perimeters(polytope: Polytope) -> NDArray[np.float64]:
    """Return the face perimeter per input halfspace; 0 where no 2-face forms."""
    perimeters = np.zeros(len(polytope.halfspaces))
    for face in polytope.faces:
        perimeters[face.halfspace_index] = face.perimeter
    return perimeters


def face_normal_set(polytope: Polytope) -> frozenset[tuple[float, float, float]]:
    """Return the normals of the halfspaces that attain a 2-face."""
    return frozenset(
        (float(face.normal[0]), float(face.normal[1]), float(face.normal[2]))
        for face in polytope.faces
    )


def support_touch_dimension(
    polytope: Polytope,
    n: ArrayLike,
    tol: float = EPS_GEOM,
) -> int:
    """Return the dimension (0, 1 or 2) of the set where <p, n> is maximal."""
    direction = np.asarray(n, dtype=float)
    direction = direction / np.linalg.norm(direction)
    tol_abs = tol * polytope.diameter
    heights = polytope.vertices @ direction
    top = polytope.vertices[heights >= heights.max() - tol_abs]
    return _affine_dimension(top, tol_abs)


def volume(polytope: Polytope) -> float:
    """Return the volume as a fan of tetrahedra from the vertex centroid."""
    center = polytope.centroid
    total = 0.0
    for face in polytope.faces:
        local = face.vertices - center
        fan = np.cross(local[1:-1], local[2:])
        total += float((fan @ local[0]).sum()) / 6.0
    return total


def equal_up_to_translation(
    first: Polytope,
    second: Polytope,
    tol: float = EPS_GEOM,
) -> bool:
    """Check vertex sets agree after matching centroids.

    ``tol`` is relative to the diameter of ``first``; vertices are paired by an
    optimal assignment on Euclidean distance.
    """
    if len(first.vertices) != len(second.vertices):
        return False
    shifted = second.vertices + (first.centroid - second.centroid)
    cost = cdist(first.vertices, shifted)
    rows, cols = linear_sum_assignment(cost)
    return bool(cost[rows, cols].max() <= tol * first.diameter)


def _number(value: float) -> str:
    return format(float(value), f".{SIGNIFICANT_DIGITS}g")


def to_off(polytope: Polytope) -> str:
    """Render the polytope as an OFF mesh."""
    lines = ["OFF", f"{len(polytope.vertices)} {len(polytope.faces)} 0"]
    lines.extend(" ".join(_number(c) for c in vertex) for vertex in polytope.vertices)
    lines.extend(
        " ".join([str(len(face.vertex_indices)), *map(str, face.vertex_indices)])
        for face in polytope.faces
    )
    return "\n".join(lines) + "\n"


def polytope_report(polytope: Polytope) -> dict[str, Any]:
    """Return the JSON-ready report of vertices, faces and volume."""
    return {
        "vertices": [[float(c) for c in vertex] for vertex in polytope.vertices],
        "faces": [
            {
                "normal": [float(c) for c in face.normal],
                "vertex_indices": list(face.vertex_indices),
                "perimeter": face.perimeter,
                "area": face.area,
            }
            for face in polytope.faces
        ],
        "volume": volume(polytope),
    }
