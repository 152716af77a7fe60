"""
Circular and axial model families, and a Monte Carlo harness that checks
the chi-square and F calibrations of the test statistics.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from scipy import special, stats

from projshape.bootstrap import run_resamples, substream
from projshape.exceptions import (
    InsufficientData,
    MeanNotUnique,
    NotConcentrated,
    SingularCovariance,
    UndefinedMeanDirection,
)
from projshape.extrinsic import one_sample_extrinsic_test
from projshape.models import CalibrationReport, Reference, TestReport
from projshape.projective_core import AxialPoint
from projshape.tangent_stats import directional_t_squared, one_sample_hotelling, tangent_frame

logger = structlog.get_logger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class VonMisesParams:
    mu: float
    kappa: float

    def __post_init__(self):
        if not self.kappa >= 0.0:
            raise ValueError(f"Concentration must be nonnegative, got {self.kappa}")


@dataclass(frozen=True, eq=False)
class MultivariateVonMisesParams:
    """
    Coefficients of the exponent
    a^T cos + b^T sin + cos^T A cos + cos^T B sin + sin^T C sin
    over q angles. A, B and C have zero diagonals; B need not be symmetric.
    """

    a: np.ndarray
    b: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        q = a.size
        arrays = {"a": a, "b": np.atleast_1d(np.asarray(self.b, dtype=float))}
        for name in ("A", "B", "C"):
            matrix = np.asarray(getattr(self, name), dtype=float)
            if matrix.shape != (q, q):
                raise ValueError(f"{name} must be {q} x {q}, got {matrix.shape}")
            if np.any(np.diag(matrix) != 0.0):
                raise ValueError(f"{name} must have a zero diagonal")
            arrays[name] = matrix
        if arrays["b"].size != q:
            raise ValueError(f"b must have length {q}")
        for name, value in arrays.items():
            object.__setattr__(self, name, value)

    @property
    def q(self) -> int:
        return self.a.size

    @classmethod
    def independent(cls, params: Sequence[VonMisesParams]) -> "MultivariateVonMisesParams":
        """Product of independent von Mises components."""
        q = len(params)
        zeros = np.zeros((q, q))
        return cls(
            a=np.array([p.kappa * np.cos(p.mu) for p in params]),
            b=np.array([p.kappa * np.sin(p.mu) for p in params]),
            A=zeros,
            B=zeros,
            C=zeros,
        )

    @classmethod
    def from_bivariate_cosine(
        cls, kappa1: float, kappa2: float, kappa3: float, mu: float, nu: float
    ) -> "MultivariateVonMisesParams":
        """
        Bivariate cosine model
        kappa1 cos(t1 - mu) + kappa2 cos(t2 - nu) - kappa3 cos(t1 - mu - t2 + nu).

        Expanding the coupling term gives cos t1 cos t2 and sin t1 sin t2
        coefficients -kappa3 cos(mu - nu), a cos t1 sin t2 coefficient
        -kappa3 sin(nu - mu) and a sin t1 cos t2 coefficient -kappa3 sin(mu - nu).
        """
        if kappa1 < 0 or kappa2 < 0:
            raise ValueError("kappa1 and kappa2 must be nonnegative")
        coupling = -kappa3 * np.cos(mu - nu)
        A = np.array([[0.0, coupling], [0.0, 0.0]])
        B = np.array([[0.0, -kappa3 * np.sin(nu - mu)], [-kappa3 * np.sin(mu - nu), 0.0]])
        C = np.array([[0.0, coupling], [0.0, 0.0]])
        return cls(
            a=np.array([kappa1 * np.cos(mu), kappa2 * np.cos(nu)]),
            b=np.array([kappa1 * np.sin(mu), kappa2 * np.sin(nu)]),
            A=A,
            B=B,
            C=C,
        )


@dataclass(frozen=True, eq=False)
class DimrothWatsonParams:
    mu: np.ndarray
    k: float

    def __post_init__(self):
        object.__setattr__(self, "mu", AxialPoint.from_vector(self.mu).unit)


def von_mises_logpdf(theta: Union[float, np.ndarray], params: VonMisesParams) -> Union[float, np.ndarray]:
    """log of exp(kappa cos(theta - mu)) / (2 pi I0(kappa)), with I0 through the scaled i0e."""
    kappa = params.kappa
    log_norm = np.log(TWO_PI) + np.log(special.i0e(kappa)) + kappa
    result = kappa * np.cos(np.asarray(theta, dtype=float) - params.mu) - log_norm
    return float(result) if np.ndim(result) == 0 else result


def _draw_von_mises(rng: np.random.Generator, params: VonMisesParams, size) -> np.ndarray:
    if np.isinf(params.kappa):
        return np.full(size, float(np.mod(params.mu, TWO_PI)))
    if params.kappa == 0.0:
        return rng.uniform(0.0, TWO_PI, size=size)
    draws = stats.vonmises.rvs(params.kappa, loc=params.mu, size=size, random_state=rng)
    return np.mod(draws, TWO_PI)


def von_mises_sample(params: VonMisesParams, n: int, seed: int) -> np.ndarray:
    """n von Mises angles in [0, 2 pi) from a Philox stream seeded by ``seed``."""
    if n < 1:
        raise ValueError(f"Sample size must be positive, got {n}")
    return _draw_von_mises(substream(seed, 0), params, n)


def multivariate_vm_logdensity_unnormalized(thetas: Sequence[float], params: MultivariateVonMisesParams) -> float:
    t = np.asarray(thetas, dtype=float)
    if t.shape != (params.q,):
        raise ValueError(f"Expected {params.q} angles, got shape {t.shape}")
    c, s = np.cos(t), np.sin(t)
    return float(params.a @ c + params.b @ s + c @ params.A @ c + c @ params.B @ s + s @ params.C @ s)


def dimroth_watson_logdensity_unnormalized(z: Union[AxialPoint, Sequence[float]], params: DimrothWatsonParams) -> float:
    unit = z.unit if isinstance(z, AxialPoint) else AxialPoint.from_vector(z).unit
    if unit.size != params.mu.size:
        raise ValueError("Axis and mean axis have different dimensions")
    return float(params.k * (params.mu @ unit) ** 2)


# Calibration harness

SCENARIOS: Dict[str, Tuple[str, Reference]] = {
    "extrinsic": ("one-sample extrinsic T2", Reference.CHI2),
    "tangent": ("one-sample tangent Hotelling", Reference.F),
    "directional": ("directional T2", Reference.CHI2),
}

DEGENERATE = (SingularCovariance, MeanNotUnique, InsufficientData, UndefinedMeanDirection, NotConcentrated)


def true_mean_axes(m: int, q: int) -> np.ndarray:
    """Fixed well-separated mean directions used by the simulations."""
    base = np.arange(1, m + 2, dtype=float)
    axes = np.array([base + s for s in range(q)])
    return axes / np.linalg.norm(axes, axis=1, keepdims=True)


def simulate_tangent_noise(
    rng: np.random.Generator, mean_axes: np.ndarray, n: int, kappa: float
) -> np.ndarray:
    """
    n observations around ``mean_axes``: x = normalize(mu + sum_i tan(t_i) e_i)
    with independent von Mises angles t_i ~ vM(0, kappa) on each tangent direction.
    """
    q, m1 = mean_axes.shape
    data = np.empty((n, q, m1))
    params = VonMisesParams(mu=0.0, kappa=kappa)
    for s in range(q):
        frame = tangent_frame(mean_axes[s])
        angles = _draw_von_mises(rng, params, (n, m1 - 1))
        angles = np.where(angles > np.pi, angles - TWO_PI, angles)
        points = mean_axes[s][None, :] + np.tan(angles) @ frame.T
        data[:, s, :] = points / np.linalg.norm(points, axis=1, keepdims=True)
    return data


def _statistic(scenario: str) -> Callable[[np.ndarray, np.ndarray], TestReport]:
    if scenario == "extrinsic":
        return one_sample_extrinsic_test
    if scenario == "tangent":
        return one_sample_hotelling
    return directional_t_squared


def calibration_harness(
    scenario: str,
    n: int,
    reps: int,
    seed: int,
    m: int = 1,
    q: int = 1,
    kappa: float = 100.0,
    workers: Optional[int] = None,
) -> CalibrationReport:
    """
    Simulate ``reps`` datasets at a known mean and report how often the test
    rejects at the nominal 5% and 1% levels.

    Replications whose statistic is undefined (for example exactly
    concentrated data) are counted as degenerate rather than failing the run.

    Raises:
        ValueError: for an unknown scenario or invalid sizes
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"Unknown calibration scenario '{scenario}'; choose one of {sorted(SCENARIOS)}")
    if n < 2 or reps < 1 or m < 1 or q < 1:
        raise ValueError("Calibration needs n >= 2, reps >= 1, m >= 1 and q >= 1")
    name, reference = SCENARIOS[scenario]
    statistic = _statistic(scenario)
    mean_axes = true_mean_axes(m, q)
    M = m * q

    def replicate(rng: np.random.Generator) -> float:
        data = simulate_tangent_noise(rng, mean_axes, n, kappa)
        try:
            return float(statistic(data, mean_axes).p_value)
        except DEGENERATE:
            return float("nan")

    run = run_resamples(replicate, reps, seed, workers=workers, rejectable=())
    outcomes = np.array(run.values, dtype=float)
    p_values = outcomes[~np.isnan(outcomes)]
    completed = int(p_values.size)
    degenerate = reps - completed
    if degenerate:
        logger.warning("Degenerate calibration replications", scenario=scenario, degenerate=degenerate, reps=reps)

    def exceedance(level: float) -> Tuple[Optional[float], Optional[float]]:
        if completed == 0:
            return None, None
        rate = float(np.mean(p_values < level))
        return rate, float(np.sqrt(rate * (1.0 - rate) / completed))

    e95, se95 = exceedance(0.05)
    e99, se99 = exceedance(0.01)
    df = [M, n - M] if reference is Reference.F else [M]
    logger.info("Calibration finished", scenario=scenario, n=n, reps=reps, exceedance_95=e95)
    return CalibrationReport(
        scenario=scenario,
        statistic=name,
        reference=reference,
        df=df,
        m=m,
        q=q,
        n=n,
        kappa=kappa,
        reps=reps,
        seed=seed,
        completed=completed,
        degenerate=degenerate,
        exceedance_95=e95,
        se_95=se95,
        exceedance_99=e99,
        se_99=se99,
    )
