"""
Tangent-space statistics for concentrated directional data: mean
directions, tangent coordinates, one- and two-sample Hotelling tests, the
Watson-Williams test on the circle, the Studentized directional T^2 and its
bootstrap confidence regions.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import structlog
from scipy import stats

from projshape import tolerances
from projshape.bootstrap import BootstrapDistribution, resample_indices, run_resamples
from projshape.exceptions import InsufficientData, SingularCovariance, UndefinedMeanDirection
from projshape.linalg import PseudoInverse, is_invertible, symmetric_pinv
from projshape.models import BootstrapInfo, Reference, RegionMode, TestReport
from projshape.projective_core import AxialPoint, InvariantVector
from projshape.shape_space import DirectionalSample, SampleLike, align_components, pooled_alignment, sample_array

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class MeanDirections:
    """Per-component mean directions (q, m+1) and mean resultant lengths (q,)."""

    mu: np.ndarray
    rbar: np.ndarray

    @property
    def q(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True, eq=False)
class TangentDecomposition:
    """
    ybar_D - mu = sum_a E_a d_a + nu_a, with E_a the tangent frame at the
    sample mean direction of component a.
    """

    d: np.ndarray
    nu: np.ndarray
    frame: List[np.ndarray]


@dataclass(frozen=True, eq=False)
class PooledCovariance:
    S: np.ndarray
    rank: int
    pinv: np.ndarray
    full_rank: bool

    @classmethod
    def from_matrix(cls, S: np.ndarray) -> "PooledCovariance":
        inverse: PseudoInverse = symmetric_pinv(S)
        return cls(S=inverse.matrix, rank=inverse.rank, pinv=inverse.pinv, full_rank=inverse.full_rank)


MeanLike = Union[MeanDirections, Sequence[AxialPoint], np.ndarray]


def _aligned(sample: SampleLike) -> np.ndarray:
    if isinstance(sample, DirectionalSample):
        return np.array(sample.data)
    return align_components(sample_array(sample))


def _mean_array(mu: MeanLike) -> np.ndarray:
    if isinstance(mu, MeanDirections):
        return np.array(mu.mu)
    if isinstance(mu, np.ndarray):
        arr = np.atleast_2d(np.asarray(mu, dtype=float))
    else:
        arr = np.array([axis.unit for axis in mu])
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


def _align_rows(rows: np.ndarray, references: np.ndarray) -> np.ndarray:
    signs = np.where(np.einsum("si,si->s", rows, references) < 0, -1.0, 1.0)
    return rows * signs[:, None]


def mean_directions(sample: SampleLike) -> MeanDirections:
    """
    Normalized per-component sample means of an aligned sample.

    Raises:
        UndefinedMeanDirection: if some resultant length is at or below DET_TOL
    """
    return _mean_directions(_aligned(sample))


def _mean_directions(data: np.ndarray) -> MeanDirections:
    resultant = data.mean(axis=0)
    rbar = np.linalg.norm(resultant, axis=1)
    if np.any(rbar <= tolerances.DET_TOL):
        s = int(np.argmin(rbar))
        raise UndefinedMeanDirection(f"Mean direction of component {s + 1} is undefined", component=s)
    return MeanDirections(mu=resultant / rbar[:, None], rbar=rbar)


def tangent_frame(mu: np.ndarray) -> np.ndarray:
    """
    Orthonormal basis (m+1, m) of the tangent space at unit vector ``mu``.

    Canonical basis vectors are orthogonalized against mu in index order,
    skipping the one most parallel to mu.
    """
    mu = np.asarray(mu, dtype=float)
    skip = int(np.argmax(np.abs(mu)))
    basis: List[np.ndarray] = []
    for i in range(mu.size):
        if i == skip:
            continue
        e = np.zeros(mu.size)
        e[i] = 1.0
        for u in [mu, *basis]:
            e = e - (e @ u) * u
        basis.append(e / np.linalg.norm(e))
    return np.column_stack(basis)


def tangent_coords(sample: SampleLike, mu: MeanLike) -> np.ndarray:
    """Tangent coordinates in the frames of ``tangent_frame``, flattened to shape (n, m*q)."""
    return _coords(_aligned(sample), _mean_array(mu))


def _coords(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    frames = [tangent_frame(c) for c in centers]
    coords = [data[:, s, :] @ frames[s] for s in range(centers.shape[0])]
    return np.concatenate(coords, axis=1)


def _biased_covariance(v: np.ndarray) -> np.ndarray:
    centered = v - v.mean(axis=0)
    return centered.T @ centered / v.shape[0]


def _warn_if_diffuse(rbar: np.ndarray, flags: List[str], label: str) -> None:
    if np.any(rbar < tolerances.CONCENTRATION_WARNING):
        logger.warning("Data not concentrated", sample=label, rbar=rbar.tolist())
        flags.append(f"{label}: mean resultant length below {tolerances.CONCENTRATION_WARNING}")


def one_sample_hotelling(sample: SampleLike, mu0: MeanLike, alpha: Optional[float] = None) -> TestReport:
    """
    Hotelling test of a hypothesised mean direction on tangent coordinates.

    Coordinates are taken in the tangent space at mu0. With S the covariance
    of the coordinates (divisor n), D^2 = vbar^T S^- vbar and
    F = (n - M) / M * D^2 on F(M, n - M). For M = 1 this is the squared
    one-sample t statistic of the signed tangent coordinates.

    Raises:
        InsufficientData: if n <= M
    """
    data = _aligned(sample)
    n, q, m1 = data.shape
    M = (m1 - 1) * q
    if n <= M:
        raise InsufficientData(f"One-sample Hotelling test needs n > M = {M}, got n = {n}", n=n, M=M)

    flags: List[str] = []
    directions = _mean_directions(data)
    _warn_if_diffuse(directions.rbar, flags, "sample")

    center = _mean_array(mu0)
    if center.shape != data.shape[1:]:
        raise ValueError(f"Hypothesised mean has shape {center.shape}, expected {data.shape[1:]}")
    center = _align_rows(center, directions.mu)
    v = _coords(data, center)
    vbar = v.mean(axis=0)
    cov = PooledCovariance.from_matrix(_biased_covariance(v))
    if not cov.full_rank:
        logger.warning("Rank-deficient tangent covariance", rank=cov.rank, M=M)
        flags.append(f"covariance rank {cov.rank} < M = {M}; pseudo-inverse used")
    d2 = float(vbar @ cov.pinv @ vbar)
    F = (n - M) / M * d2
    t2 = (n - 1) * d2
    return TestReport(
        test="one-sample tangent Hotelling",
        statistic=F,
        reference=Reference.F,
        df=[M, n - M],
        p_value=float(stats.f.sf(F, M, n - M)),
        asymptotic_p_value=float(stats.chi2.sf(t2, M)),
        alpha=alpha,
        df_convention="F(M, n - M) with M = m*q; chi2(M) on (n - 1) D^2",
        flags=flags,
        details={"n": n, "M": M, "D2": d2, "T2": t2, "rank": cov.rank, "rbar": directions.rbar.tolist()},
    )


def _two_sample_core(
    v: np.ndarray,
    w: np.ndarray,
    M: int,
    test: str,
    strict: bool,
    alpha: Optional[float],
    flags: List[str],
    details: Dict,
) -> TestReport:
    n1, n2 = v.shape[0], w.shape[0]
    N = n1 + n2
    if N <= M + 1:
        raise InsufficientData(f"Two-sample test needs n1 + n2 > M + 1 = {M + 1}, got {N}", n1=n1, n2=n2, M=M)
    S = (n1 * _biased_covariance(v) + n2 * _biased_covariance(w)) / (N - 2)
    cov = PooledCovariance.from_matrix(S)
    df1 = M
    convention = "F(M, n1 + n2 - M - 1) with M = m*q"
    if not cov.full_rank:
        if strict:
            raise SingularCovariance(f"Pooled covariance has rank {cov.rank} < M = {M}", rank=cov.rank, M=M)
        logger.warning("Rank-deficient pooled covariance", rank=cov.rank, M=M)
        df1 = max(cov.rank, 1)
        flags.append(f"pooled covariance rank {cov.rank} < M = {M}; pseudo-inverse with df reduced to rank")
        convention = "F(rank, n1 + n2 - rank - 1), reduced for a rank-deficient covariance"
    diff = v.mean(axis=0) - w.mean(axis=0)
    d2 = float(diff @ cov.pinv @ diff)
    df2 = N - df1 - 1
    F = n1 * n2 * df2 / (N * (N - 2) * df1) * d2
    p_value = float(stats.f.sf(F, df1, df2))
    logger.info("Two-sample Hotelling test", test=test, n1=n1, n2=n2, M=M, F=F, p_value=p_value)
    return TestReport(
        test=test,
        statistic=F,
        reference=Reference.F,
        df=[df1, df2],
        p_value=p_value,
        alpha=alpha,
        df_convention=convention,
        flags=flags,
        details={**details, "n1": n1, "n2": n2, "M": M, "D2": d2, "rank": cov.rank},
    )


def two_sample_hotelling(
    sample1: SampleLike, sample2: SampleLike, alpha: Optional[float] = None, strict: bool = False
) -> TestReport:
    """
    Two-sample Hotelling test on tangent coordinates at the pooled mean directions.

    S = (n1 S1 + n2 S2) / (n1 + n2 - 2) with S_i the divisor-n covariances,
    D^2 = (vbar - wbar)^T S^- (vbar - wbar) and
    F = n1 n2 (n1 + n2 - M - 1) / ((n1 + n2)(n1 + n2 - 2) M) * D^2.

    Raises:
        InsufficientData: if n1 + n2 <= M + 1
        SingularCovariance: if ``strict`` and the pooled covariance has rank < M
    """
    first, second = pooled_alignment(sample1, sample2)
    q, m1 = first.shape[1:]
    M = (m1 - 1) * q
    flags: List[str] = []
    pooled = _mean_directions(np.concatenate([first, second]))
    _warn_if_diffuse(pooled.rbar, flags, "pooled")
    v = _coords(first, pooled.mu)
    w = _coords(second, pooled.mu)
    return _two_sample_core(
        v,
        w,
        M,
        "two-sample tangent Hotelling",
        strict,
        alpha,
        flags,
        {"pooled_mean": pooled.mu.tolist(), "pooled_rbar": pooled.rbar.tolist()},
    )


def euclidean_two_sample_hotelling(
    inv1: Sequence[Union[InvariantVector, np.ndarray]],
    inv2: Sequence[Union[InvariantVector, np.ndarray]],
    alpha: Optional[float] = None,
    strict: bool = False,
) -> TestReport:
    """Classical two-sample Hotelling test on projective invariant vectors."""

    def stack(items: Sequence[Union[InvariantVector, np.ndarray]]) -> np.ndarray:
        rows = [item.iota if isinstance(item, InvariantVector) else np.ravel(item) for item in items]
        return np.atleast_2d(np.array(rows, dtype=float))

    v, w = stack(inv1), stack(inv2)
    if v.shape[1] != w.shape[1]:
        raise ValueError(f"Invariant vectors have different lengths: {v.shape[1]} and {w.shape[1]}")
    return _two_sample_core(v, w, v.shape[1], "two-sample Hotelling on invariants", strict, alpha, [], {})


def watson_williams(angles: Sequence[float], theta0: float, alpha: Optional[float] = None) -> TestReport:
    """
    Test of a hypothesised mean direction on the circle:
    F = (n - 1)(R - (cos theta0, sin theta0) . R_vec) / (n - R) on F(1, n - 1).

    Raises:
        InsufficientData: if n < 2
        UndefinedMeanDirection: if the resultant vanishes
        SingularCovariance: if all angles coincide away from theta0
    """
    theta = np.asarray(angles, dtype=float)
    n = theta.size
    if n < 2:
        raise InsufficientData("Watson-Williams test needs at least two angles", n=n)
    resultant = np.array([np.cos(theta).sum(), np.sin(theta).sum()])
    R = float(np.linalg.norm(resultant))
    if R <= tolerances.DET_TOL * n:
        raise UndefinedMeanDirection("Resultant vector vanishes", n=n)
    numerator = R - float(np.array([np.cos(theta0), np.sin(theta0)]) @ resultant)
    denominator = n - R
    if denominator <= tolerances.DET_TOL * n:
        if numerator <= tolerances.DET_TOL * n:
            F = 0.0
        else:
            raise SingularCovariance("Sample has zero dispersion and does not point at theta0", n=n)
    else:
        F = (n - 1) * max(numerator, 0.0) / denominator
    return TestReport(
        test="Watson-Williams",
        statistic=F,
        reference=Reference.F,
        df=[1, n - 1],
        p_value=float(stats.f.sf(F, 1, n - 1)),
        alpha=alpha,
        df_convention="F(1, n - 1)",
        details={"n": n, "R": R, "mean_angle": float(np.mod(np.arctan2(resultant[1], resultant[0]), 2 * np.pi))},
    )


def _directional_parts(data: np.ndarray, mu0: np.ndarray, components: Sequence[int]):
    n = data.shape[0]
    ybar = data.mean(axis=0)
    norms = np.linalg.norm(ybar, axis=1)
    if np.any(norms <= tolerances.DET_TOL):
        raise UndefinedMeanDirection("Mean direction undefined in a bootstrap or observed sample")
    mu_hat = ybar / norms[:, None]
    center = _align_rows(mu0, mu_hat)

    frames, d_parts, nu_parts, projections = [], [], [], []
    for s in components:
        E = tangent_frame(mu_hat[s])
        frames.append(E)
        diff = mu_hat[s] - center[s]
        d_parts.append(E.T @ diff)
        nu_parts.append(diff - E @ (E.T @ diff))
        projections.append(data[:, s, :] @ E / norms[s])
    proj = np.concatenate(projections, axis=1)
    G = proj.T @ proj / n
    decomposition = TangentDecomposition(d=np.concatenate(d_parts), nu=np.array(nu_parts), frame=frames)
    return decomposition, G


def _directional_statistic(data: np.ndarray, mu0: np.ndarray, components: Sequence[int]) -> float:
    decomposition, G = _directional_parts(data, mu0, components)
    if not is_invertible(G):
        raise SingularCovariance("Directional covariance G(y) is singular", M=G.shape[0])
    d = decomposition.d
    return float(data.shape[0] * d @ np.linalg.solve(G, d))


def _components(q: int, components: Optional[Sequence[int]]) -> List[int]:
    if components is None:
        return list(range(q))
    chosen = [int(c) for c in components]
    if not chosen or any(c < 0 or c >= q for c in chosen) or len(set(chosen)) != len(chosen):
        raise ValueError(f"Components must be distinct indices in 0..{q - 1}, got {components}")
    return chosen


def directional_t_squared(
    sample: SampleLike,
    mu0: MeanLike,
    components: Optional[Sequence[int]] = None,
    alpha: Optional[float] = None,
) -> TestReport:
    """
    Studentized directional statistic T^2 = n d^T G(y)^{-1} d on chi-square(M).

    d holds the tangential coordinates of ybar_D - mu0 in orthonormal frames
    at the sample mean directions, and
    G_ab(y) = n^{-1} (|ybar^a| |ybar^b|)^{-1} sum_r (E_a^T y_r^a)(E_b^T y_r^b)^T.
    ``components`` restricts the statistic to a subset of the q components.

    Raises:
        SingularCovariance: if G(y) is not invertible
    """
    data = _aligned(sample)
    chosen = _components(data.shape[1], components)
    center = _mean_array(mu0)
    if center.shape != data.shape[1:]:
        raise ValueError(f"Hypothesised mean has shape {center.shape}, expected {data.shape[1:]}")
    decomposition, _ = _directional_parts(data, center, chosen)
    t2 = _directional_statistic(data, center, chosen)
    M = decomposition.d.size
    return TestReport(
        test="directional T2" if components is None else f"directional T2 (components {[c + 1 for c in chosen]})",
        statistic=t2,
        reference=Reference.CHI2,
        df=[M],
        p_value=float(stats.chi2.sf(t2, M)),
        alpha=alpha,
        df_convention="chi2 with M = m * (number of components)",
        details={"n": data.shape[0], "M": M, "d": decomposition.d.tolist(), "nu": np.linalg.norm(decomposition.nu, axis=1).tolist()},
    )


@dataclass(frozen=True, eq=False)
class ConfidenceRegion:
    """
    Bootstrap confidence region for the mean directions.

    In joint mode a candidate belongs when T^2 does not exceed the single
    threshold; in Bonferroni mode every per-component T_j^2 must stay below
    its own threshold.
    """

    data: np.ndarray
    center: np.ndarray
    mode: RegionMode
    alpha: float
    thresholds: np.ndarray
    distributions: List[BootstrapDistribution]

    def statistics(self, mu: MeanLike) -> np.ndarray:
        center = _mean_array(mu)
        if self.mode is RegionMode.JOINT:
            return np.array([_directional_statistic(self.data, center, range(self.data.shape[1]))])
        return np.array([_directional_statistic(self.data, center, [s]) for s in range(self.data.shape[1])])

    def contains(self, mu: MeanLike) -> bool:
        return bool(np.all(self.statistics(mu) <= self.thresholds + tolerances.REGION_SLACK))


def bootstrap_confidence_region(
    sample: SampleLike,
    B: int,
    seed: int,
    alpha: float,
    mode: Union[RegionMode, str] = RegionMode.JOINT,
    workers: Optional[int] = None,
) -> ConfidenceRegion:
    """
    Pivotal bootstrap region from the distribution of T^2(Y*, ybar_D).

    Joint mode uses the (1 - alpha) quantile of the full statistic;
    Bonferroni mode uses the (1 - alpha/q) quantile of each per-component
    statistic. alpha = 1 gives threshold 0, so only ybar_D belongs.

    Raises:
        InsufficientData: if n < 2
        BootstrapUnstable: if too many resamples are degenerate
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    mode = RegionMode(mode)
    data = _aligned(sample)
    n, q = data.shape[:2]
    if n < 2:
        raise InsufficientData("Bootstrap needs at least two observations", n=n)
    center = _mean_directions(data).mu
    groups = [list(range(q))] if mode is RegionMode.JOINT else [[s] for s in range(q)]

    def draw(rng: np.random.Generator) -> List[float]:
        resample = data[resample_indices(rng, n)]
        return [_directional_statistic(resample, center, group) for group in groups]

    run = run_resamples(draw, B, seed, workers=workers)
    values = np.array(run.values)
    level = 1.0 - alpha if mode is RegionMode.JOINT else 1.0 - alpha / q
    distributions = [
        BootstrapDistribution(values=np.sort(values[:, j]), seed=seed, rejected=run.rejected)
        for j in range(len(groups))
    ]
    thresholds = np.array([dist.quantile(level) for dist in distributions])
    logger.info("Bootstrap region built", mode=mode.value, alpha=alpha, thresholds=thresholds.tolist())
    return ConfidenceRegion(
        data=data,
        center=center,
        mode=mode,
        alpha=alpha,
        thresholds=thresholds,
        distributions=distributions,
    )


def bootstrap_directional_test(
    sample: SampleLike,
    mu0: MeanLike,
    B: int,
    seed: int,
    alpha: Optional[float] = None,
    workers: Optional[int] = None,
) -> TestReport:
    """
    Nonparametric test of mu0: the tail probability of the observed
    T^2(Y, mu0) under the bootstrap distribution of T^2(Y*, ybar_D).
    """
    data = _aligned(sample)
    n = data.shape[0]
    if n < 2:
        raise InsufficientData("Bootstrap needs at least two observations", n=n)
    center = _mean_array(mu0)
    q = data.shape[1]
    observed = _directional_statistic(data, center, range(q))
    ybar = _mean_directions(data).mu

    def draw(rng: np.random.Generator) -> float:
        return _directional_statistic(data[resample_indices(rng, n)], ybar, range(q))

    run = run_resamples(draw, B, seed, workers=workers)
    distribution = BootstrapDistribution.from_run(run, observed=observed)
    return TestReport(
        test="directional T2 (bootstrap)",
        statistic=observed,
        reference=Reference.BOOTSTRAP,
        p_value=distribution.p_value,
        alpha=alpha,
        df_convention="bootstrap tail probability of T*2(Y*, ybar_D)",
        bootstrap=BootstrapInfo(seed=seed, resamples=B, rejected=run.rejected),
        details={"quantile_95": distribution.quantile(0.95)},
    )
