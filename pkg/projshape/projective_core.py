"""
Projective geometry kernel: homogeneous and axial points, projective frames,
the axial coordinate of a point relative to a frame, cross-ratios and the
projective invariants of registered points.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from scipy.linalg import lu_factor, lu_solve

from projshape import tolerances
from projshape.exceptions import DegenerateFrame, PointAtInfinity, ProjShapeError

logger = structlog.get_logger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]


def _frozen(values: ArrayLike) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def _same_axis(u: np.ndarray, w: np.ndarray, tol: float) -> bool:
    return min(np.linalg.norm(u - w), np.linalg.norm(u + w)) <= tol


def canonical_sign(vector: np.ndarray) -> np.ndarray:
    """Flip a representative so its last nonzero coordinate is positive."""
    v = np.asarray(vector, dtype=float)
    nonzero = np.flatnonzero(np.abs(v) > tolerances.NONZERO_TOL)
    if nonzero.size and v[nonzero[-1]] < 0:
        return -v
    return v.copy()


@dataclass(frozen=True, eq=False)
class HomogeneousPoint:
    """A point of RP^m given by homogeneous coordinates of arbitrary scale."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError(f"Homogeneous coordinates must be a vector of length >= 2, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Homogeneous coordinates must be finite")
        if np.linalg.norm(arr) <= tolerances.NONZERO_TOL:
            raise ValueError("Homogeneous coordinates must not be the zero vector")
        object.__setattr__(self, "coords", _frozen(arr))

    @property
    def m(self) -> int:
        return self.coords.size - 1

    def unit(self) -> np.ndarray:
        return self.coords / np.linalg.norm(self.coords)

    def to_axial(self) -> "AxialPoint":
        return AxialPoint(self.unit())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HomogeneousPoint):
            return NotImplemented
        return self.m == other.m and _same_axis(self.unit(), other.unit(), tolerances.UNIT_TOL)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class AxialPoint:
    """A point of RP^m stored as a unit vector; ``unit`` and ``-unit`` are the same axis."""

    unit: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.unit, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError(f"Axial point must be a vector of length >= 2, got shape {arr.shape}")
        if abs(np.linalg.norm(arr) - 1.0) > tolerances.UNIT_TOL:
            raise ValueError(f"Axial point must have unit norm, got {np.linalg.norm(arr):.12g}")
        object.__setattr__(self, "unit", _frozen(arr))

    @classmethod
    def from_vector(cls, vector: ArrayLike) -> "AxialPoint":
        """Normalize any nonzero vector into an axial point."""
        return cls(HomogeneousPoint(vector).unit())

    @property
    def m(self) -> int:
        return self.unit.size - 1

    def canonical(self) -> np.ndarray:
        return canonical_sign(self.unit)

    def aligned_to(self, reference: ArrayLike) -> np.ndarray:
        """Representative with nonnegative dot product against ``reference``."""
        return -self.unit if float(np.dot(self.unit, reference)) < 0 else self.unit.copy()

    def to_list(self, decimals: Optional[int] = None) -> list:
        values = self.canonical()
        if decimals is not None:
            values = np.round(values, decimals) + 0.0
        return [float(v) for v in values]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AxialPoint):
            return NotImplemented
        return self.m == other.m and _same_axis(self.unit, other.unit, tolerances.UNIT_TOL)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class InvariantVector:
    """Affine coordinates (iota_1, ..., iota_m) of a registered point."""

    iota: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "iota", _frozen(np.atleast_1d(self.iota)))


@dataclass(frozen=True)
class PositionCheck:
    """Outcome of a general position test."""

    ok: bool
    min_abs_det: float
    failing_subset: Optional[Tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.ok

    @property
    def diagnostic(self) -> str:
        if self.ok:
            return f"general position (min |det| = {self.min_abs_det:.3e})"
        return f"points {list(self.failing_subset or ())} are linearly dependent"


@dataclass(frozen=True)
class CrossRatio:
    """
    A cross-ratio that may be infinite.

    ``value`` is None exactly when ``at_infinity`` is set; ``sign`` records the
    sign of the numerator so the direction of divergence is not lost.
    """

    value: Optional[float]
    at_infinity: bool = False
    sign: int = 1

    def __float__(self) -> float:
        if self.at_infinity or self.value is None:
            raise PointAtInfinity("Cross-ratio is infinite", sign=self.sign)
        return self.value


@dataclass(frozen=True, eq=False)
class CoordinateDetails:
    """Intermediate vectors of the axial coordinate computation."""

    v: np.ndarray
    y: np.ndarray
    z: AxialPoint


def affine_embed(x: Union[float, ArrayLike]) -> HomogeneousPoint:
    """Map x in R^m to [x^1 : ... : x^m : 1]."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"Expected a point of R^m, got shape {arr.shape}")
    return HomogeneousPoint(np.append(arr, 1.0))


def _as_homogeneous(point: Union[HomogeneousPoint, float, ArrayLike]) -> HomogeneousPoint:
    if isinstance(point, HomogeneousPoint):
        return point
    return affine_embed(point)


def general_position_check(points: Sequence[HomogeneousPoint]) -> PositionCheck:
    """
    Check that every (m+1)-subset of m+2 points is linearly independent.

    Columns are normalized to unit norm first so the determinant threshold
    does not depend on the scale of the representatives.
    """
    pts = [_as_homogeneous(p) for p in points]
    if not pts:
        raise ValueError("Expected m+2 points, got none")
    m = pts[0].m
    if any(p.m != m for p in pts):
        raise ValueError("All frame points must lie in the same projective space")
    if len(pts) != m + 2:
        raise ValueError(f"Expected {m + 2} points for a frame of RP^{m}, got {len(pts)}")

    columns = np.column_stack([p.unit() for p in pts])
    min_det = np.inf
    for subset in combinations(range(m + 2), m + 1):
        det = abs(float(np.linalg.det(columns[:, subset])))
        min_det = min(min_det, det)
        if det <= tolerances.DET_TOL:
            return PositionCheck(ok=False, min_abs_det=det, failing_subset=subset)
    return PositionCheck(ok=True, min_abs_det=float(min_det))


@dataclass(frozen=True, eq=False)
class ProjectiveFrame:
    """m+2 points in general position with the cached frame matrix and coefficients."""

    points: Tuple[HomogeneousPoint, ...]
    U: np.ndarray
    beta: np.ndarray
    _lu: tuple = field(repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.points[0].m

    @classmethod
    def from_points(cls, points: Sequence[Union[HomogeneousPoint, ArrayLike]]) -> "ProjectiveFrame":
        """
        Build a frame from m+2 points given in R^m or as homogeneous points.

        Raises:
            DegenerateFrame: if the points are not in general position or the
                unit point has a vanishing coefficient
        """
        pts = tuple(_as_homogeneous(p) for p in points)
        check = general_position_check(pts)
        if not check:
            raise DegenerateFrame(
                f"Frame is degenerate: {check.diagnostic}",
                failing_subset=check.failing_subset,
                min_abs_det=check.min_abs_det,
            )

        m = pts[0].m
        U = np.column_stack([p.coords for p in pts[: m + 1]])
        lu = lu_factor(U)
        unit_point = pts[m + 1].coords
        beta = lu_solve(lu, unit_point)

        # Coefficient of each normalized column in the normalized unit point
        relative = np.abs(beta) * np.linalg.norm(U, axis=0) / np.linalg.norm(unit_point)
        if np.any(relative <= tolerances.DET_TOL):
            raise DegenerateFrame(
                "Unit point lies on a face of the frame simplex",
                beta=beta.tolist(),
            )
        return cls(points=pts, U=_frozen(U), beta=_frozen(beta), _lu=lu)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self._lu, rhs)


def frame_coefficients(points: Sequence[ArrayLike]) -> ProjectiveFrame:
    """Projective frame from m+2 points of R^m."""
    return ProjectiveFrame.from_points([affine_embed(p) for p in points])


def projective_coordinate_details(
    x: Union[HomogeneousPoint, ArrayLike], frame: ProjectiveFrame
) -> CoordinateDetails:
    """
    Axial coordinate of ``x`` relative to ``frame`` with the intermediate vectors.

    v solves U v = p(x), y = v / beta componentwise and z = y / ||y||.
    """
    point = _as_homogeneous(x)
    if point.m != frame.m:
        raise ValueError(f"Point lives in RP^{point.m} but the frame spans RP^{frame.m}")
    v = frame.solve(point.coords)
    y = v / frame.beta
    norm = float(np.linalg.norm(y))
    if norm <= tolerances.DET_TOL * float(np.linalg.norm(v) + 1.0):
        raise ProjShapeError("Internal error: registered vector vanished", v=v.tolist())
    return CoordinateDetails(v=v, y=y, z=AxialPoint(y / norm))


def projective_coordinate(x: Union[HomogeneousPoint, ArrayLike], frame: ProjectiveFrame) -> AxialPoint:
    return projective_coordinate_details(x, frame).z


def _distinct(a: float, b: float, scale: float) -> bool:
    return abs(a - b) > tolerances.DET_TOL * scale


def cross_ratio(x1: float, x2: float, x3: float, x: float) -> CrossRatio:
    """
    Cross-ratio c = (x - x2)(x1 - x3) / ((x3 - x2)(x1 - x)).

    It is the affine coordinate of x after sending x1, x2, x3 to the standard
    frame of RP^1, so it matches the first invariant of a registered point.
    """
    scale = max(1.0, abs(x1), abs(x2), abs(x3), abs(x))
    if not (_distinct(x1, x2, scale) and _distinct(x1, x3, scale) and _distinct(x2, x3, scale)):
        raise ValueError(f"Frame points must be pairwise distinct, got {x1}, {x2}, {x3}")

    numerator = (x - x2) * (x1 - x3) / (x3 - x2)
    if not _distinct(x1, x, scale):
        return CrossRatio(value=None, at_infinity=True, sign=1 if numerator >= 0 else -1)
    return CrossRatio(value=numerator / (x1 - x), sign=1 if numerator >= 0 else -1)


def psi_chart(x: Sequence[float], i: int, j: int, k: int) -> float:
    """
    Chart of four points on RP^1 that sends x_i to 0, x_j to infinity and x_k to 1.

    Indices are 1-based; the remaining index l is the evaluated point. With
    this convention psi(1, 2, 3) is the reciprocal of ``cross_ratio`` and the
    charts satisfy psi_124 = 1 / psi_123, psi_134 = 1 - psi_124 and
    psi_234 = psi_134 / (psi_134 - 1).
    """
    if len(x) != 4:
        raise ValueError("Exactly four points are required")
    if len({i, j, k}) != 3 or not {i, j, k} <= {1, 2, 3, 4}:
        raise ValueError(f"Chart indices must be three distinct values in 1..4, got {(i, j, k)}")
    (l,) = {1, 2, 3, 4} - {i, j, k}
    xi, xj, xk, xl = (float(x[n - 1]) for n in (i, j, k, l))
    denominator = (xl - xj) * (xk - xi)
    if abs(denominator) <= tolerances.DET_TOL * max(1.0, *map(abs, (xi, xj, xk, xl))) ** 2:
        raise PointAtInfinity("Chart value is infinite", indices=(i, j, k))
    return (xl - xi) * (xk - xj) / denominator


def axial_angle_and_double(z: AxialPoint) -> Tuple[float, float]:
    """Axial angle phi in [0, pi) of a point of RP^1 and its doubled angle theta in [0, 2 pi)."""
    if z.m != 1:
        raise ValueError(f"Angles are defined for RP^1 only, got RP^{z.m}")
    phi = float(np.mod(np.arctan2(z.unit[1], z.unit[0]), np.pi))
    if np.pi - phi <= tolerances.UNIT_TOL:
        phi = 0.0
    theta = float(np.mod(2.0 * phi, 2.0 * np.pi))
    return phi, theta


def invariants_from_axial(z: Union[AxialPoint, ArrayLike]) -> InvariantVector:
    """
    Projective invariants iota_j = z^j / z^{m+1}.

    Raises:
        PointAtInfinity: if the last coordinate vanishes
    """
    unit = z.unit if isinstance(z, AxialPoint) else AxialPoint.from_vector(z).unit
    last = float(unit[-1])
    if abs(last) <= tolerances.DET_TOL:
        raise PointAtInfinity("Registered point is at infinity", last_coordinate=last)
    return InvariantVector(unit[:-1] / last)


def random_projective_matrix(m: int, rng: np.random.Generator, min_abs_det: float = 1e-3) -> np.ndarray:
    """Random nonsingular (m+1) x (m+1) matrix acting on homogeneous coordinates."""
    while True:
        A = rng.normal(size=(m + 1, m + 1))
        if abs(np.linalg.det(A)) > min_abs_det:
            return A
