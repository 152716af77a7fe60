"""
Comparison of two extrinsic mean axes on RP^2 through the rotation that
carries one onto the other.

A rotation by angle theta about unit axis n is sent to the point
[cos theta : sin theta * n] of RP^3; its affine coordinates G = tan(theta) * n
are bootstrapped to test whether the two means coincide.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from scipy.spatial.transform import Rotation

from projshape import tolerances
from projshape.bootstrap import percentile_interval, resample_indices, run_resamples
from projshape.exceptions import AmbiguousAxisNearPi, AtInfinity, InsufficientData
from projshape.extrinsic import eigen_summary
from projshape.models import BootstrapInfo, IntervalRow, Reference, TestReport, Verdict
from projshape.shape_space import SampleLike, sample_array

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class Rotation3:
    """A proper rotation of R^3."""

    R: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if R.shape != (3, 3):
            raise ValueError(f"Rotation must be 3 x 3, got {R.shape}")
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-10) or abs(np.linalg.det(R) - 1.0) > 1e-10:
            raise ValueError("Matrix is not a proper rotation")
        object.__setattr__(self, "R", R.copy())

    @classmethod
    def from_axis_angle(cls, axis: Sequence[float], angle: float) -> "Rotation3":
        n = np.asarray(axis, dtype=float)
        return cls(Rotation.from_rotvec(n / np.linalg.norm(n) * angle).as_matrix())


@dataclass(frozen=True, eq=False)
class RotationAxis4:
    """Image of a rotation in RP^3, kept as the unit representative with h0 = cos theta."""

    h: np.ndarray
    near_pi: bool = False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RotationAxis4):
            return NotImplemented
        return min(np.linalg.norm(self.h - other.h), np.linalg.norm(self.h + other.h)) <= tolerances.UNIT_TOL

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class AffineRotCoords:
    g: np.ndarray


def _unit(vector: Sequence[float]) -> np.ndarray:
    v = np.asarray(vector, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"Expected a 3-vector, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if norm <= tolerances.NONZERO_TOL:
        raise ValueError("Expected a nonzero 3-vector")
    return v / norm


def aligning_rotation(a: Sequence[float], b: Sequence[float]) -> Rotation3:
    """
    Rotation taking axis a to axis b in the plane they span, fixing its orthocomplement.

    b is replaced by -b when a . b < 0 so the angle never exceeds pi/2.
    """
    a, b = _unit(a), _unit(b)
    if float(a @ b) < 0:
        b = -b
    axis = np.cross(a, b)
    s = float(np.linalg.norm(axis))
    if s <= tolerances.NONZERO_TOL:
        return Rotation3(np.eye(3))
    angle = float(np.arctan2(s, float(a @ b)))
    return Rotation3.from_axis_angle(axis, angle)


def rotation_axis_H(rotation: Union[Rotation3, np.ndarray], strict: bool = False) -> RotationAxis4:
    """
    h = [cos theta : sin theta * n] for a rotation by theta in [0, pi] about n.

    The identity maps to [1 : 0 : 0 : 0]. Within ANGLE_TOL of pi the axis is
    recovered from R + I and the result is flagged.

    Raises:
        AmbiguousAxisNearPi: if ``strict`` and the angle is within ANGLE_TOL of pi
    """
    R = rotation.R if isinstance(rotation, Rotation3) else Rotation3(rotation).R
    rotvec = Rotation.from_matrix(R).as_rotvec()
    theta = float(np.linalg.norm(rotvec))
    if theta < tolerances.ANGLE_TOL:
        return RotationAxis4(h=np.array([1.0, 0.0, 0.0, 0.0]))
    if np.pi - theta <= tolerances.ANGLE_TOL:
        if strict:
            raise AmbiguousAxisNearPi("Rotation angle is within tolerance of pi", angle=theta)
        logger.warning("Rotation angle near pi; axis recovered from R + I", angle=theta)
        symmetric = R + np.eye(3)
        column = symmetric[:, int(np.argmax(np.linalg.norm(symmetric, axis=0)))]
        n = column / np.linalg.norm(column)
        return RotationAxis4(h=np.concatenate([[np.cos(theta)], np.sin(theta) * n]), near_pi=True)
    n = rotvec / theta
    return RotationAxis4(h=np.concatenate([[np.cos(theta)], np.sin(theta) * n]))


def affine_rot_coords(h: Union[RotationAxis4, Sequence[float]]) -> AffineRotCoords:
    """
    g = (h1, h2, h3) / h0.

    Raises:
        AtInfinity: if |h0| <= DET_TOL
    """
    vector = h.h if isinstance(h, RotationAxis4) else np.asarray(h, dtype=float)
    vector = vector / np.linalg.norm(vector)
    if abs(vector[0]) <= tolerances.DET_TOL:
        raise AtInfinity("Rotation image has no affine coordinates (h0 = 0)", h=vector.tolist())
    return AffineRotCoords(g=vector[1:] / vector[0])


def _component_mean(data: np.ndarray, component: int) -> np.ndarray:
    eigen = eigen_summary(data[:, component : component + 1, :])
    return eigen.top(0)


def _rotation_coords(data1: np.ndarray, data2: np.ndarray, component: int) -> Tuple[np.ndarray, RotationAxis4]:
    rotation = aligning_rotation(_component_mean(data1, component), _component_mean(data2, component))
    h = rotation_axis_H(rotation)
    return affine_rot_coords(h).g, h


@dataclass(frozen=True, eq=False)
class AxisTestResult:
    report: TestReport
    g: np.ndarray
    h: RotationAxis4
    cloud: np.ndarray
    intervals: List[IntervalRow] = field(default_factory=list)
    scale: float = 1.0


def two_sample_axis_test(
    sample1: SampleLike,
    sample2: SampleLike,
    B: int,
    seed: int,
    alpha: float = 0.05,
    scale: Optional[float] = None,
    component: int = 0,
    workers: Optional[int] = None,
) -> AxisTestResult:
    """
    Nonparametric bootstrap test of equal extrinsic mean axes on RP^2.

    Both groups are resampled independently in every replicate and G(r*)
    is recomputed. Each coordinate of the scaled cloud ``scale * G(r*)`` is
    trimmed by (1 - (1 - alpha)^(1/3)) / 2 on both sides; the means are
    declared equal when 0 lies in all three intervals. ``scale`` defaults
    to sqrt(n1 + n2).

    Raises:
        ValueError: if the samples are not on RP^2 or alpha is out of range
        InsufficientData: if either sample has fewer than two observations
        MeanNotUnique: if an original mean is not unique
        BootstrapUnstable: if too many resamples are degenerate
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    data1, data2 = sample_array(sample1), sample_array(sample2)
    if data1.shape[2] != 3 or data2.shape[2] != 3:
        raise ValueError("Rotation comparison is defined for shapes on RP^2 (m = 2)")
    if data1.shape[1] != data2.shape[1]:
        raise ValueError("Samples have different numbers of components")
    if not 0 <= component < data1.shape[1]:
        raise ValueError(f"Component must lie in 0..{data1.shape[1] - 1}, got {component}")
    n1, n2 = data1.shape[0], data2.shape[0]
    if n1 < 2 or n2 < 2:
        raise InsufficientData("Each sample needs at least two observations", n1=n1, n2=n2)
    factor = float(np.sqrt(n1 + n2)) if scale is None else float(scale)

    g, h = _rotation_coords(data1, data2, component)

    def draw(rng: np.random.Generator) -> np.ndarray:
        first = data1[resample_indices(rng, n1)]
        second = data2[resample_indices(rng, n2)]
        return _rotation_coords(first, second, component)[0]

    run = run_resamples(draw, B, seed, workers=workers)
    cloud = factor * np.array(run.values)
    tail = (1.0 - (1.0 - alpha) ** (1.0 / 3.0)) / 2.0
    intervals = []
    for j in range(3):
        lower, upper = percentile_interval(cloud[:, j], tail)
        intervals.append(IntervalRow(coordinate=f"G{j + 1}", lower=lower, upper=upper))
    accept = all(row.contains_zero for row in intervals)
    logger.info("Axis comparison finished", B=B, seed=seed, accept=accept, rejected=run.rejected)

    report = TestReport(
        test="two-sample mean axis comparison (H-map bootstrap)",
        statistic=float(factor * np.linalg.norm(g)),
        reference=Reference.BOOTSTRAP,
        alpha=alpha,
        verdict=Verdict.FAIL_TO_REJECT if accept else Verdict.REJECT,
        df_convention="simultaneous percentile intervals, per-coordinate tail (1 - (1 - alpha)^(1/3)) / 2",
        bootstrap=BootstrapInfo(seed=seed, resamples=B, rejected=run.rejected),
        flags=["rotation angle near pi"] if h.near_pi else [],
        details={
            "n1": n1,
            "n2": n2,
            "component": component,
            "scale": factor,
            "tail": tail,
            "H": h.h.tolist(),
            "G": g.tolist(),
            "intervals": [row.model_dump() for row in intervals],
        },
    )
    return AxisTestResult(report=report, g=g, h=h, cloud=cloud, intervals=intervals, scale=factor)
