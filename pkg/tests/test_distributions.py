"""
Test cases for the circular model families and the calibration harness.
"""

import numpy as np
import pytest
from scipy import integrate, stats

from projshape.distributions import (
    DimrothWatsonParams,
    MultivariateVonMisesParams,
    VonMisesParams,
    calibration_harness,
    dimroth_watson_logdensity_unnormalized,
    multivariate_vm_logdensity_unnormalized,
    von_mises_logpdf,
    von_mises_sample,
)
from projshape.models import Reference


class TestVonMises:
    """Univariate von Mises density and sampler."""

    @pytest.mark.parametrize("kappa", [0.5, 4.0, 250.0])
    def test_density_integrates_to_one(self, kappa):
        params = VonMisesParams(mu=1.2, kappa=kappa)
        total, _ = integrate.quad(lambda t: np.exp(von_mises_logpdf(t, params)), 0.0, 2 * np.pi, points=[1.2])
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_matches_scipy(self):
        params = VonMisesParams(mu=0.3, kappa=7.0)
        theta = np.linspace(-2.5, 3.0, 13)
        assert np.allclose(von_mises_logpdf(theta, params), stats.vonmises.logpdf(theta, 7.0, loc=0.3))

    def test_uniform_limit(self):
        """kappa = 0 is the uniform density."""
        assert von_mises_logpdf(2.0, VonMisesParams(mu=0.0, kappa=0.0)) == pytest.approx(-np.log(2 * np.pi))

    def test_negative_concentration(self):
        with pytest.raises(ValueError, match="nonnegative"):
            VonMisesParams(mu=0.0, kappa=-1.0)

    def test_sampling_is_seeded(self):
        """Same seed, same draws, all in [0, 2 pi)."""
        params = VonMisesParams(mu=5.0, kappa=3.0)
        a = von_mises_sample(params, 100, seed=11)
        b = von_mises_sample(params, 100, seed=11)
        assert np.array_equal(a, b)
        assert np.all((a >= 0.0) & (a < 2 * np.pi))
        assert not np.array_equal(a, von_mises_sample(params, 100, seed=12))

    def test_infinite_concentration(self):
        """kappa = inf is a point mass at mu."""
        draws = von_mises_sample(VonMisesParams(mu=7.0, kappa=np.inf), 5, seed=0)
        assert np.allclose(draws, 7.0 - 2 * np.pi)

    def test_sample_size(self):
        with pytest.raises(ValueError, match="positive"):
            von_mises_sample(VonMisesParams(mu=0.0, kappa=1.0), 0, seed=0)


class TestMultivariateVonMises:
    """Unnormalized multivariate densities."""

    def test_bivariate_cosine_expansion(self):
        """The coefficient form matches the cosine model term by term."""
        k1, k2, k3, mu, nu = 2.0, 1.5, 0.7, 0.4, -1.1
        params = MultivariateVonMisesParams.from_bivariate_cosine(k1, k2, k3, mu, nu)
        rng = np.random.default_rng(3)
        for t1, t2 in rng.uniform(0.0, 2 * np.pi, size=(25, 2)):
            direct = k1 * np.cos(t1 - mu) + k2 * np.cos(t2 - nu) - k3 * np.cos(t1 - mu - t2 + nu)
            assert multivariate_vm_logdensity_unnormalized([t1, t2], params) == pytest.approx(direct, abs=1e-12)

    def test_independent_components(self):
        """Without coupling the exponent is a sum of von Mises terms."""
        components = [VonMisesParams(mu=0.2, kappa=3.0), VonMisesParams(mu=2.5, kappa=1.0)]
        params = MultivariateVonMisesParams.independent(components)
        t = np.array([1.0, -0.3])
        expected = sum(p.kappa * np.cos(x - p.mu) for p, x in zip(components, t))
        assert multivariate_vm_logdensity_unnormalized(t, params) == pytest.approx(expected, abs=1e-12)

    def test_nonzero_diagonal(self):
        with pytest.raises(ValueError, match="zero diagonal"):
            MultivariateVonMisesParams(
                a=[1.0, 1.0], b=[0.0, 0.0], A=[[1.0, 0.0], [0.0, 0.0]], B=np.zeros((2, 2)), C=np.zeros((2, 2))
            )

    def test_angle_count(self):
        params = MultivariateVonMisesParams.independent([VonMisesParams(0.0, 1.0)] * 2)
        with pytest.raises(ValueError, match="Expected 2 angles"):
            multivariate_vm_logdensity_unnormalized([0.1, 0.2, 0.3], params)


class TestDimrothWatson:
    """Axial density k (mu . z)^2."""

    def test_sign_invariance(self):
        params = DimrothWatsonParams(mu=np.array([0.0, 0.0, 2.0]), k=5.0)
        z = np.array([0.6, 0.0, 0.8])
        assert dimroth_watson_logdensity_unnormalized(z, params) == pytest.approx(5.0 * 0.64)
        assert dimroth_watson_logdensity_unnormalized(-z, params) == pytest.approx(5.0 * 0.64)

    def test_dimension_mismatch(self):
        params = DimrothWatsonParams(mu=np.array([1.0, 0.0]), k=1.0)
        with pytest.raises(ValueError, match="dimensions"):
            dimroth_watson_logdensity_unnormalized([1.0, 0.0, 0.0], params)


class TestCalibration:
    """Monte Carlo check of the reference distributions."""

    def test_tangent_test_holds_its_level(self):
        """About 5% of replications reject at the 5% level."""
        report = calibration_harness("tangent", n=30, reps=200, seed=17)
        assert report.reference is Reference.F
        assert report.df == [1.0, 29.0]
        assert report.completed + report.degenerate == 200
        assert 0.01 <= report.exceedance_95 <= 0.11

    def test_same_seed_same_report(self):
        a = calibration_harness("directional", n=20, reps=30, seed=5, m=2, q=1, workers=1)
        b = calibration_harness("directional", n=20, reps=30, seed=5, m=2, q=1, workers=2)
        assert a == b
        assert a.df == [2.0]

    def test_unknown_scenario(self):
        with pytest.raises(ValueError, match="Unknown calibration scenario"):
            calibration_harness("nope", n=10, reps=5, seed=0)

    def test_invalid_sizes(self):
        with pytest.raises(ValueError, match="n >= 2"):
            calibration_harness("tangent", n=1, reps=5, seed=0)
