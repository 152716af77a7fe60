"""
Registration of k-point configurations into (RP^m)^q and assembly of
sign-aligned directional samples.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from projshape import tolerances
from projshape.exceptions import NotConcentrated
from projshape.linalg import jacobi_eigh
from projshape.projective_core import (
    AxialPoint,
    HomogeneousPoint,
    ProjectiveFrame,
    axial_angle_and_double,
    canonical_sign,
    projective_coordinate,
)

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Configuration:
    """
    An ordered k-ad of landmarks.

    ``points`` has shape (k, m) for landmarks in R^m, or (k, m+1) when
    ``homogeneous`` is set and rows are homogeneous coordinates.
    """

    points: np.ndarray
    homogeneous: bool = False

    def __post_init__(self):
        arr = np.array(self.points, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError(f"Configuration must be a (k, m) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Configuration contains non-finite coordinates")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1] - 1 if self.homogeneous else self.points.shape[1]

    def homogeneous_points(self) -> List[HomogeneousPoint]:
        if self.homogeneous:
            return [HomogeneousPoint(row) for row in self.points]
        ones = np.ones((self.k, 1))
        return [HomogeneousPoint(row) for row in np.hstack([self.points, ones])]

    def transformed(self, matrix: np.ndarray) -> "Configuration":
        """Apply a projective transformation to the homogeneous coordinates."""
        coords = np.array([p.coords for p in self.homogeneous_points()])
        return Configuration(coords @ np.asarray(matrix, dtype=float).T, homogeneous=True)


@dataclass(frozen=True, eq=False)
class ProjectiveShape:
    """Registered shape of a k-ad: q = k - m - 2 axial points."""

    axes: Tuple[AxialPoint, ...]
    m: int
    k: int
    frame_indices: Tuple[int, ...]

    def __post_init__(self):
        if len(self.axes) != self.k - self.m - 2:
            raise ValueError(f"Expected {self.k - self.m - 2} axes, got {len(self.axes)}")
        if any(axis.m != self.m for axis in self.axes):
            raise ValueError("All axes must lie in the same projective space")

    @property
    def q(self) -> int:
        return len(self.axes)

    def as_array(self) -> np.ndarray:
        """(q, m+1) array of unit representatives."""
        return np.array([axis.unit for axis in self.axes])

    @classmethod
    def from_array(
        cls,
        rows: np.ndarray,
        frame_indices: Optional[Sequence[int]] = None,
    ) -> "ProjectiveShape":
        """Shape from already registered coordinates; rows are normalized."""
        arr = np.atleast_2d(np.asarray(rows, dtype=float))
        q, m = arr.shape[0], arr.shape[1] - 1
        indices = tuple(frame_indices) if frame_indices is not None else tuple(range(m + 2))
        return cls(
            axes=tuple(AxialPoint.from_vector(row) for row in arr),
            m=m,
            k=q + m + 2,
            frame_indices=indices,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProjectiveShape):
            return NotImplemented
        return (
            (self.m, self.k, self.frame_indices) == (other.m, other.k, other.frame_indices)
            and all(a == b for a, b in zip(self.axes, other.axes))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class DirectionalSample:
    """
    n observations of q unit vectors in R^{m+1}, sign-aligned per component.

    ``data`` has shape (n, q, m+1).
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=float, copy=True)
        if arr.ndim == 2:
            arr = arr[:, None, :]
        if arr.ndim != 3 or arr.shape[0] == 0 or arr.shape[2] < 2:
            raise ValueError(f"Directional sample must have shape (n, q, m+1), got {arr.shape}")
        norms = np.linalg.norm(arr, axis=2)
        if np.any(np.abs(norms - 1.0) > tolerances.UNIT_TOL):
            raise ValueError("Directional sample rows must be unit vectors")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def q(self) -> int:
        return self.data.shape[1]

    @property
    def m(self) -> int:
        return self.data.shape[2] - 1

    def component(self, s: int) -> np.ndarray:
        return self.data[:, s, :]


SampleLike = Union[DirectionalSample, Sequence[ProjectiveShape], np.ndarray]


def sample_array(sample: SampleLike) -> np.ndarray:
    """(n, q, m+1) array of unit representatives from any supported sample form."""
    if isinstance(sample, DirectionalSample):
        return np.array(sample.data)
    if isinstance(sample, np.ndarray):
        arr = np.asarray(sample, dtype=float)
        if arr.ndim == 2:
            arr = arr[:, None, :]
        if arr.ndim != 3 or arr.shape[0] == 0:
            raise ValueError(f"Sample array must have shape (n, q, m+1), got {arr.shape}")
        return arr / np.linalg.norm(arr, axis=2, keepdims=True)
    shapes = list(sample)
    if not shapes:
        raise ValueError("Sample is empty")
    _check_compatible(shapes)
    return np.array([shape.as_array() for shape in shapes])


def _check_compatible(shapes: Sequence[ProjectiveShape]) -> None:
    first = shapes[0]
    for index, shape in enumerate(shapes[1:], start=1):
        if (shape.m, shape.k, shape.frame_indices) != (first.m, first.k, first.frame_indices):
            raise ValueError(
                f"Shape {index} has (m={shape.m}, k={shape.k}, frame={shape.frame_indices}); "
                f"expected (m={first.m}, k={first.k}, frame={first.frame_indices})"
            )


def _resolve_frame_indices(config: Configuration, frame_indices: Optional[Sequence[int]]) -> Tuple[int, ...]:
    m, k = config.m, config.k
    if frame_indices is None:
        return tuple(range(m + 2))
    indices = tuple(int(i) for i in frame_indices)
    if len(indices) != m + 2:
        raise ValueError(f"Expected {m + 2} frame indices, got {len(indices)}")
    if len(set(indices)) != len(indices):
        raise ValueError(f"Frame indices must be distinct, got {indices}")
    if any(i < 0 or i >= k for i in indices):
        raise ValueError(f"Frame indices must lie in 0..{k - 1}, got {indices}")
    return indices


def register(config: Configuration, frame_indices: Optional[Sequence[int]] = None) -> ProjectiveShape:
    """
    Register a configuration against a projective frame.

    The frame defaults to the first m+2 landmarks. Remaining landmarks keep
    their original relative order.

    Raises:
        ValueError: if k < m + 3 or the frame indices are invalid
        DegenerateFrame: if the frame points are not in general position
    """
    m, k = config.m, config.k
    if k < m + 3:
        raise ValueError(f"Registration needs k >= m + 3 landmarks, got k={k}, m={m}")
    indices = _resolve_frame_indices(config, frame_indices)
    points = config.homogeneous_points()
    frame = ProjectiveFrame.from_points([points[i] for i in indices])
    others = [i for i in range(k) if i not in indices]
    axes = tuple(projective_coordinate(points[i], frame) for i in others)
    return ProjectiveShape(axes=axes, m=m, k=k, frame_indices=indices)


def torus_representation(shape: ProjectiveShape) -> np.ndarray:
    """Doubled axial angles of a shape in (RP^1)^q, one per axis."""
    if shape.m != 1:
        raise ValueError(f"Torus representation requires m = 1, got m = {shape.m}")
    return np.array([axial_angle_and_double(axis)[1] for axis in shape.axes])


def top_eigenvector(component: np.ndarray) -> np.ndarray:
    """Canonically signed top eigenvector of the moment matrix of (n, m+1) unit rows."""
    moment = component.T @ component / component.shape[0]
    _, vectors = jacobi_eigh(moment)
    return canonical_sign(vectors[:, -1])


def align_components(data: np.ndarray, references: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Flip every representative into the half-space of its component reference.

    References default to the top eigenvectors of the component moment matrices.

    Raises:
        NotConcentrated: if some |x . reference| is at or below the alignment floor
    """
    arr = np.array(data, dtype=float, copy=True)
    q = arr.shape[1]
    if references is None:
        references = np.array([top_eigenvector(arr[:, s, :]) for s in range(q)])
    for s in range(q):
        dots = arr[:, s, :] @ references[s]
        weak = np.flatnonzero(np.abs(dots) <= tolerances.ALIGNMENT_FLOOR)
        if weak.size:
            raise NotConcentrated(
                f"Component {s + 1} is not concentrated enough for a directional representation",
                component=s,
                observations=weak.tolist(),
                min_abs_dot=float(np.abs(dots).min()),
            )
        arr[dots < 0, s, :] *= -1.0
    return arr


def assemble_sample(shapes: Sequence[ProjectiveShape]) -> DirectionalSample:
    """Directional sample from registered shapes sharing m, k and frame."""
    data = sample_array(list(shapes))
    return DirectionalSample(align_components(data))


def pooled_alignment(*samples: SampleLike) -> List[np.ndarray]:
    """Sign-align several samples against references computed from their union."""
    arrays = [sample_array(sample) for sample in samples]
    shapes = {arr.shape[1:] for arr in arrays}
    if len(shapes) != 1:
        raise ValueError(f"Samples have incompatible (q, m+1) shapes: {sorted(shapes)}")
    pooled = np.concatenate(arrays, axis=0)
    q = pooled.shape[1]
    references = np.array([top_eigenvector(pooled[:, s, :]) for s in range(q)])
    return [align_components(arr, references) for arr in arrays]
