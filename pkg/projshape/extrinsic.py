"""
Extrinsic means on (RP^m)^q under the embedding [x] -> x x^T, the
asymptotic covariance G of the mean's tangential coordinates, and the
one-sample T^2 test with its chi-square and bootstrap calibrations.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from scipy import stats

from projshape import tolerances
from projshape.bootstrap import BootstrapDistribution, resample_indices, run_resamples
from projshape.exceptions import InsufficientData, MeanNotUnique, SingularCovariance
from projshape.linalg import is_invertible, jacobi_eigh
from projshape.models import BootstrapInfo, Reference, TestReport
from projshape.projective_core import AxialPoint
from projshape.shape_space import SampleLike, sample_array

logger = structlog.get_logger(__name__)

AxesLike = Union[Sequence[AxialPoint], np.ndarray]


@dataclass(frozen=True, eq=False)
class EigenSummary:
    """
    Ascending eigenvalues and matching eigenvectors of each component's
    moment matrix J_s.

    ``values`` has shape (q, m+1); ``vectors[s]`` holds eigenvectors as
    columns, the last one spanning the extrinsic mean axis.
    """

    values: np.ndarray
    vectors: np.ndarray
    traces: np.ndarray

    @property
    def q(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1] - 1

    @property
    def gaps(self) -> np.ndarray:
        return self.values[:, -1] - self.values[:, -2]

    def top(self, s: int) -> np.ndarray:
        return self.vectors[s][:, -1]

    def tangent_basis(self, s: int) -> np.ndarray:
        """D_s = (g_s(1), ..., g_s(m)) as an (m+1, m) matrix."""
        return self.vectors[s][:, :-1]

    def well_separated(self) -> bool:
        return bool(np.all(self.gaps > tolerances.GAP_TOL * self.traces))


@dataclass(frozen=True, eq=False)
class ExtrinsicMean:
    axes: Tuple[AxialPoint, ...]
    eigen: EigenSummary
    n: int

    def as_array(self) -> np.ndarray:
        return np.array([axis.unit for axis in self.axes])


@dataclass(frozen=True, eq=False)
class GMatrix:
    """Covariance of the tangential coordinates, indexed by pairs (s, a) in lexicographic order."""

    entries: np.ndarray

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    def invertible(self) -> bool:
        return is_invertible(self.entries)


def veronese_embed(z: Union[AxialPoint, np.ndarray]) -> np.ndarray:
    """j([z]) = z z^T for a unit representative z."""
    unit = z.unit if isinstance(z, AxialPoint) else np.asarray(z, dtype=float)
    return np.outer(unit, unit)


def moment_matrices(data: np.ndarray) -> np.ndarray:
    """J_s = n^{-1} sum_r X_rs X_rs^T for every component, shape (q, m+1, m+1)."""
    return np.einsum("rsi,rsj->sij", data, data) / data.shape[0]


def eigen_summary(data: np.ndarray, require_gap: bool = True) -> EigenSummary:
    """
    Eigen-decompose every component moment matrix with the Jacobi solver.

    Raises:
        MeanNotUnique: if ``require_gap`` and some top eigenvalue is not
            separated from the next one by more than GAP_TOL * trace
    """
    moments = moment_matrices(data)
    pairs = [jacobi_eigh(J) for J in moments]
    summary = EigenSummary(
        values=np.array([values for values, _ in pairs]),
        vectors=np.array([vectors for _, vectors in pairs]),
        traces=np.trace(moments, axis1=1, axis2=2),
    )
    if require_gap and not summary.well_separated():
        s = int(np.argmin(summary.gaps / summary.traces))
        raise MeanNotUnique(
            f"Extrinsic mean of component {s + 1} is not unique: top eigenvalue is not simple",
            component=s,
            gap=float(summary.gaps[s]),
        )
    return summary


def extrinsic_mean(sample: SampleLike) -> ExtrinsicMean:
    """Extrinsic mean shape: per component, the top eigenvector of J_s."""
    data = sample_array(sample)
    eigen = eigen_summary(data)
    axes = tuple(AxialPoint.from_vector(eigen.top(s)) for s in range(eigen.q))
    logger.debug("Extrinsic mean computed", n=data.shape[0], q=eigen.q, gaps=eigen.gaps.tolist())
    return ExtrinsicMean(axes=axes, eigen=eigen, n=data.shape[0])


def _axes_array(candidate: AxesLike) -> np.ndarray:
    if isinstance(candidate, np.ndarray):
        arr = np.atleast_2d(np.asarray(candidate, dtype=float))
        return arr / np.linalg.norm(arr, axis=1, keepdims=True)
    return np.array([axis.unit for axis in candidate])


def frechet_function(sample: SampleLike, candidate: AxesLike) -> float:
    """Mean squared chord distance sum_s ||j(X_rs) - j(candidate_s)||^2 over the sample."""
    data = sample_array(sample)
    axes = _axes_array(candidate)
    if axes.shape != data.shape[1:]:
        raise ValueError(f"Candidate has shape {axes.shape}, sample components have shape {data.shape[1:]}")
    embedded = np.einsum("rsi,rsj->rsij", data, data)
    target = np.einsum("si,sj->sij", axes, axes)
    return float(np.sum((embedded - target[None]) ** 2) / data.shape[0])


def _projections(data: np.ndarray, eigen: EigenSummary) -> np.ndarray:
    """(n, q, m+1) coordinates g_s(a) . X_rs."""
    return np.einsum("rsi,sia->rsa", data, eigen.vectors)


def covariance_G(sample: SampleLike, eigen: Optional[EigenSummary] = None) -> GMatrix:
    """
    Estimated covariance of the tangential coordinates of the extrinsic mean.

    G_(s,a),(t,b) = n^{-1} (d_s(m+1) - d_s(a))^{-1} (d_t(m+1) - d_t(b))^{-1}
        sum_r (g_s(a).X_rs)(g_t(b).X_rt)(g_s(m+1).X_rs)(g_t(m+1).X_rt)
    """
    data = sample_array(sample)
    if eigen is None:
        eigen = eigen_summary(data)
    elif not eigen.well_separated():
        raise MeanNotUnique("Spectral gap too small for the covariance estimate", gaps=eigen.gaps.tolist())
    proj = _projections(data, eigen)
    m = eigen.m
    gaps = eigen.values[:, -1:] - eigen.values[:, :-1]
    weights = proj[:, :, :m] * proj[:, :, m:] / gaps[None, :, :]
    w = weights.reshape(data.shape[0], -1)
    return GMatrix(entries=w.T @ w / data.shape[0])


def _tangential_offset(eigen: EigenSummary, axes: np.ndarray) -> np.ndarray:
    """(gamma_1^T D_1, ..., gamma_q^T D_q) with gamma_s aligned to g_s(m+1)."""
    parts = []
    for s in range(eigen.q):
        gamma = axes[s] if float(axes[s] @ eigen.top(s)) >= 0 else -axes[s]
        parts.append(eigen.tangent_basis(s).T @ gamma)
    return np.concatenate(parts)


def _t_squared(n: int, offset: np.ndarray, G: GMatrix) -> float:
    if not G.invertible():
        raise SingularCovariance(
            "Covariance matrix G is singular; use the bootstrap test or more data",
            M=G.M,
        )
    return float(n * offset @ np.linalg.solve(G.entries, offset))


def one_sample_extrinsic_test(sample: SampleLike, mu0: AxesLike, alpha: Optional[float] = None) -> TestReport:
    """
    T^2 = n u^T G^{-1} u with u = (gamma_s^T D_s)_s, referred to chi-square with M = mq df.

    Raises:
        MeanNotUnique: if some spectral gap is too small
        SingularCovariance: if G is not invertible
    """
    data = sample_array(sample)
    n = data.shape[0]
    axes = _axes_array(mu0)
    if axes.shape != data.shape[1:]:
        raise ValueError(f"Hypothesised mean has shape {axes.shape}, expected {data.shape[1:]}")
    eigen = eigen_summary(data)
    G = covariance_G(data, eigen)
    offset = _tangential_offset(eigen, axes)
    t2 = _t_squared(n, offset, G)
    M = offset.size
    p_value = float(stats.chi2.sf(t2, M))
    logger.info("Extrinsic one-sample test", n=n, M=M, t2=t2, p_value=p_value)
    return TestReport(
        test="one-sample extrinsic T2",
        statistic=t2,
        reference=Reference.CHI2,
        df=[M],
        p_value=p_value,
        alpha=alpha,
        df_convention="chi2 with M = m*q",
        details={"n": n, "M": M, "gaps": eigen.gaps.tolist()},
    )


def _bootstrap_t_squared(data: np.ndarray, original_top: np.ndarray) -> float:
    eigen = eigen_summary(data)
    G = covariance_G(data, eigen)
    offset = _tangential_offset(eigen, original_top)
    return _t_squared(data.shape[0], offset, G)


def bootstrap_extrinsic_test(
    sample: SampleLike,
    B: int,
    seed: int,
    mu0: Optional[AxesLike] = None,
    workers: Optional[int] = None,
) -> BootstrapDistribution:
    """
    Bootstrap distribution of T*^2 = n u*^T G*^{-1} u*, where the original
    sample's mean axes take the place of the hypothesised mean.

    When ``mu0`` is given the observed statistic is attached so the
    distribution reports a tail p-value.

    Raises:
        ValueError: if B < 1
        InsufficientData: if n < 2
        BootstrapUnstable: if too many resamples are degenerate
    """
    if B < 1:
        raise ValueError(f"Number of bootstrap resamples must be positive, got {B}")
    data = sample_array(sample)
    n = data.shape[0]
    if n < 2:
        raise InsufficientData("Bootstrap needs at least two observations", n=n)
    eigen = eigen_summary(data)
    original_top = np.array([eigen.top(s) for s in range(eigen.q)])

    def draw(rng: np.random.Generator) -> float:
        return _bootstrap_t_squared(data[resample_indices(rng, n)], original_top)

    run = run_resamples(draw, B, seed, workers=workers)
    observed = None
    if mu0 is not None:
        observed = one_sample_extrinsic_test(data, mu0).statistic
    distribution = BootstrapDistribution.from_run(run, observed=observed)
    logger.info("Extrinsic bootstrap finished", B=B, seed=seed, rejected=run.rejected)
    return distribution


def bootstrap_extrinsic_report(
    sample: SampleLike, mu0: AxesLike, B: int, seed: int, alpha: Optional[float] = None, workers: Optional[int] = None
) -> TestReport:
    """One-sample extrinsic test calibrated by the bootstrap distribution of T*^2."""
    distribution = bootstrap_extrinsic_test(sample, B, seed, mu0=mu0, workers=workers)
    return TestReport(
        test="one-sample extrinsic T2 (bootstrap)",
        statistic=float(distribution.observed),
        reference=Reference.BOOTSTRAP,
        p_value=distribution.p_value,
        alpha=alpha,
        df_convention="bootstrap tail probability of T*2",
        bootstrap=BootstrapInfo(seed=seed, resamples=B, rejected=distribution.rejected),
        details={"quantile_95": distribution.quantile(0.95)},
    )
