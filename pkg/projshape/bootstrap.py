"""
Resampling engine shared by the bootstrap procedures.

Resample r draws from its own counter-based substream seeded by (seed, r),
so results do not depend on how resamples are scheduled across threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Generic, List, Optional, Sequence, Tuple, Type, TypeVar

import numpy as np
import structlog

from projshape.config import settings
from projshape.exceptions import (
    BootstrapUnstable,
    MeanNotUnique,
    SingularCovariance,
    UndefinedMeanDirection,
    AtInfinity,
)

logger = structlog.get_logger(__name__)

T = TypeVar("T")

# Degenerate resamples are redrawn instead of failing the whole run
REJECTABLE: Tuple[Type[Exception], ...] = (
    MeanNotUnique,
    SingularCovariance,
    UndefinedMeanDirection,
    AtInfinity,
)


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent Philox stream for resample ``index`` under ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def resample_indices(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, n, size=n)


@dataclass(frozen=True)
class ResampleRun(Generic[T]):
    values: List[T]
    resamples: int
    seed: int
    rejected: int
    attempts: int

    @property
    def rejection_rate(self) -> float:
        return self.rejected / self.attempts if self.attempts else 0.0


def _one_resample(
    draw: Callable[[np.random.Generator], T],
    seed: int,
    index: int,
    max_attempts: int,
    rejectable: Tuple[Type[Exception], ...],
) -> Tuple[Optional[T], int]:
    rng = substream(seed, index)
    for attempt in range(max_attempts):
        try:
            return draw(rng), attempt
        except rejectable:
            continue
    return None, max_attempts


def run_resamples(
    draw: Callable[[np.random.Generator], T],
    B: int,
    seed: int,
    *,
    workers: Optional[int] = None,
    max_attempts: Optional[int] = None,
    rejectable: Tuple[Type[Exception], ...] = REJECTABLE,
) -> ResampleRun[T]:
    """
    Evaluate ``draw`` on B independent substreams.

    ``draw`` receives the generator of its resample, draws whatever indices it
    needs and returns the statistic. A rejectable exception triggers a redraw
    from the same substream, up to ``max_attempts`` times.

    Raises:
        ValueError: if B < 1 or the seed is negative
        BootstrapUnstable: if more than half of all attempts were rejected or
            some resample never produced a value
    """
    if B < 1:
        raise ValueError(f"Number of bootstrap resamples must be positive, got {B}")
    if seed < 0:
        raise ValueError(f"Seed must be nonnegative, got {seed}")
    workers = workers or settings.workers
    max_attempts = max_attempts or settings.max_redraws

    def task(index: int) -> Tuple[Optional[T], int]:
        return _one_resample(draw, seed, index, max_attempts, rejectable)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(task, range(B)))
    else:
        outcomes = [task(index) for index in range(B)]

    rejected = sum(count for _, count in outcomes)
    attempts = rejected + sum(1 for value, _ in outcomes if value is not None)
    failed = sum(1 for value, _ in outcomes if value is None)
    run = ResampleRun(
        values=[value for value, _ in outcomes],  # type: ignore[misc]
        resamples=B,
        seed=seed,
        rejected=rejected,
        attempts=attempts,
    )
    if failed or run.rejection_rate > 0.5:
        logger.warning("Bootstrap unstable", B=B, seed=seed, rejected=rejected, attempts=attempts, failed=failed)
        raise BootstrapUnstable(
            f"{rejected} of {attempts} bootstrap resamples were degenerate",
            rejected=rejected,
            attempts=attempts,
            failed=failed,
        )
    if rejected:
        logger.info("Degenerate resamples redrawn", B=B, rejected=rejected, rejection_rate=run.rejection_rate)
    return run


@dataclass(frozen=True, eq=False)
class BootstrapDistribution:
    """Sorted bootstrap replicates of a scalar statistic."""

    values: np.ndarray
    seed: int
    rejected: int = 0
    observed: Optional[float] = None

    @classmethod
    def from_run(cls, run: ResampleRun[float], observed: Optional[float] = None) -> "BootstrapDistribution":
        return cls(values=np.sort(np.asarray(run.values, dtype=float)), seed=run.seed, rejected=run.rejected, observed=observed)

    @property
    def resamples(self) -> int:
        return int(self.values.size)

    def quantile(self, prob: float) -> float:
        """Bootstrap quantile; probabilities of zero or less map to 0 (empty region)."""
        if prob <= 0.0:
            return 0.0
        return float(np.quantile(self.values, min(prob, 1.0)))

    def tail_probability(self, statistic: float) -> float:
        """Fraction of replicates at or above ``statistic``."""
        return float(np.count_nonzero(self.values >= statistic) / self.values.size)

    @property
    def p_value(self) -> Optional[float]:
        return None if self.observed is None else self.tail_probability(self.observed)


def percentile_interval(values: Sequence[float], tail: float) -> Tuple[float, float]:
    """Equal-tailed percentile interval trimming ``tail`` from each side."""
    arr = np.asarray(values, dtype=float)
    return float(np.quantile(arr, tail)), float(np.quantile(arr, 1.0 - tail))
