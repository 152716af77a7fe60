"""
Test cases for the resampling engine.
"""

import numpy as np
import pytest

from projshape.bootstrap import (
    BootstrapDistribution,
    percentile_interval,
    resample_indices,
    run_resamples,
    substream,
)
from projshape.exceptions import BootstrapUnstable, MeanNotUnique, PointAtInfinity


class TestSubstreams:
    """Counter-based random streams."""

    def test_same_key_same_stream(self):
        assert np.array_equal(substream(3, 7).random(5), substream(3, 7).random(5))

    def test_different_index_different_stream(self):
        assert not np.array_equal(substream(3, 7).random(5), substream(3, 8).random(5))

    def test_resample_indices(self):
        idx = resample_indices(substream(0, 0), 9)
        assert idx.shape == (9,)
        assert idx.min() >= 0 and idx.max() < 9


class TestRunResamples:
    """Scheduling, redraws and failure handling."""

    def test_independent_of_worker_count(self):
        """Replicate r depends only on (seed, r)."""

        def draw(rng):
            return float(rng.normal())

        serial = run_resamples(draw, 50, seed=42, workers=1)
        threaded = run_resamples(draw, 50, seed=42, workers=4)
        assert serial.values == threaded.values
        assert serial.rejected == 0
        assert serial.rejection_rate == 0.0

    def test_degenerate_draws_are_redrawn(self):
        """Rejectable exceptions cause a redraw from the same substream."""

        def draw(rng):
            if rng.random() < 0.2:
                raise MeanNotUnique("tie")
            return 1.0

        run = run_resamples(draw, 100, seed=1, workers=1)
        assert len(run.values) == 100
        assert run.rejected > 0
        assert run.attempts == 100 + run.rejected
        assert run.rejection_rate == pytest.approx(run.rejected / run.attempts)
        assert 0.0 < run.rejection_rate < 0.5

    def test_unstable(self):
        """Mostly degenerate resamples abort the run."""

        def draw(rng):
            raise MeanNotUnique("always")

        with pytest.raises(BootstrapUnstable):
            run_resamples(draw, 10, seed=0, workers=1, max_attempts=3)

    def test_other_errors_propagate(self):
        def draw(rng):
            raise PointAtInfinity("not rejectable")

        with pytest.raises(PointAtInfinity):
            run_resamples(draw, 5, seed=0, workers=1)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError, match="positive"):
            run_resamples(lambda rng: 0.0, 0, seed=0)
        with pytest.raises(ValueError, match="nonnegative"):
            run_resamples(lambda rng: 0.0, 5, seed=-1)


class TestDistribution:
    """Quantiles, tail probabilities and percentile intervals."""

    @pytest.fixture
    def distribution(self):
        return BootstrapDistribution(values=np.arange(1.0, 11.0), seed=0, observed=8.0)

    def test_quantiles(self, distribution):
        assert distribution.quantile(0.0) == 0.0
        assert distribution.quantile(1.0) == 10.0
        assert distribution.quantile(0.5) == pytest.approx(5.5)

    def test_tail_probability(self, distribution):
        """Replicates at or above the observed value."""
        assert distribution.p_value == pytest.approx(0.3)
        assert distribution.tail_probability(100.0) == 0.0
        assert distribution.resamples == 10

    def test_no_observed_value(self):
        assert BootstrapDistribution(values=np.ones(3), seed=0).p_value is None

    def test_percentile_interval(self):
        lower, upper = percentile_interval(np.arange(101.0), 0.05)
        assert lower == pytest.approx(5.0)
        assert upper == pytest.approx(95.0)
