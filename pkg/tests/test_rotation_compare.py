"""
Test cases for the rotation-based comparison of mean axes.
"""

import numpy as np
import pytest

from projshape.exceptions import AmbiguousAxisNearPi, AtInfinity, InsufficientData
from projshape.io.fixtures import load_fixture
from projshape.models import Verdict
from projshape.rotation_compare import (
    Rotation3,
    RotationAxis4,
    affine_rot_coords,
    aligning_rotation,
    rotation_axis_H,
    two_sample_axis_test,
)


@pytest.fixture(scope="module")
def buildings():
    dataset = load_fixture("table2")
    return dataset.shapes("education"), dataset.shapes("careers")


class TestRotationAxis:
    """The map from rotations to RP^3."""

    def test_identity(self):
        """The identity goes to [1 : 0 : 0 : 0]."""
        h = rotation_axis_H(np.eye(3))
        assert np.allclose(h.h, [1.0, 0.0, 0.0, 0.0])
        assert np.allclose(affine_rot_coords(h).g, 0.0)

    def test_quarter_turn_about_e3(self):
        """pi/4 about e3 gives [1 : 0 : 0 : 1] / sqrt(2)."""
        h = rotation_axis_H(Rotation3.from_axis_angle([0.0, 0.0, 1.0], np.pi / 4))
        assert h == RotationAxis4(h=np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0))
        assert np.allclose(affine_rot_coords(h).g, [0.0, 0.0, 1.0])

    def test_half_turn_is_at_infinity(self):
        """pi/2 has no affine coordinates."""
        h = rotation_axis_H(Rotation3.from_axis_angle([0.0, 0.0, 1.0], np.pi / 2))
        with pytest.raises(AtInfinity):
            affine_rot_coords(h)

    def test_angle_pi(self):
        """Rotations by pi are flagged, or refused when strict."""
        rotation = Rotation3.from_axis_angle([1.0, 0.0, 0.0], np.pi)
        with pytest.raises(AmbiguousAxisNearPi):
            rotation_axis_H(rotation, strict=True)
        assert rotation_axis_H(rotation).near_pi

    def test_axis_and_angle_round_trip(self):
        """h = [cos theta : sin theta * n] for random axes and angles."""
        rng = np.random.default_rng(21)
        for _ in range(50):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            theta = rng.uniform(0.05, np.pi - 0.05)
            h = rotation_axis_H(Rotation3.from_axis_angle(n, theta))
            expected = RotationAxis4(h=np.concatenate([[np.cos(theta)], np.sin(theta) * n]))
            assert h == expected
            assert not h.near_pi

    def test_not_a_rotation(self):
        with pytest.raises(ValueError, match="proper rotation"):
            Rotation3(np.diag([1.0, 1.0, -1.0]))


class TestAligningRotation:
    """Rotation carrying one axis to another."""

    def test_maps_a_to_b(self):
        """R a is parallel to b and the normal of their plane is fixed."""
        rng = np.random.default_rng(9)
        for _ in range(20):
            a, b = rng.normal(size=3), rng.normal(size=3)
            rotation = aligning_rotation(a, b)
            image = rotation.R @ (a / np.linalg.norm(a))
            unit_b = b / np.linalg.norm(b)
            assert abs(abs(image @ unit_b) - 1.0) < 1e-10
            normal = np.cross(a, b)
            assert np.allclose(rotation.R @ normal, normal, atol=1e-10)

    def test_angle_is_at_most_a_right_angle(self):
        """Opposite representatives of the same axis need no rotation."""
        rotation = aligning_rotation([0.0, 0.0, 1.0], [0.0, 0.0, -2.0])
        assert np.allclose(rotation.R, np.eye(3))


class TestAxisTest:
    """Bootstrap comparison of the two building means."""

    def test_observed_rotation(self, buildings):
        """H of the rotation between the building means."""
        result = two_sample_axis_test(*buildings, B=40, seed=1)
        h = result.h.h * np.sign(result.h.h[0])
        assert np.allclose(h, [0.9997, -0.0077, 0.0029, 0.0231], atol=1e-3)
        assert np.allclose(result.g, h[1:] / h[0])

    def test_cloud_and_default_scale(self, buildings):
        """The cloud is scaled by sqrt(n1 + n2) = 3 unless told otherwise."""
        result = two_sample_axis_test(*buildings, B=40, seed=1)
        assert result.cloud.shape == (40, 3)
        assert result.scale == pytest.approx(3.0)
        assert len(result.intervals) == 3
        assert result.report.verdict in (Verdict.REJECT, Verdict.FAIL_TO_REJECT)
        scaled = two_sample_axis_test(*buildings, B=40, seed=1, scale=1.0)
        assert np.allclose(scaled.cloud * 3.0, result.cloud)

    def test_deterministic_across_workers(self, buildings):
        """Same seed, same cloud, whatever the thread count."""
        a = two_sample_axis_test(*buildings, B=30, seed=8, workers=1)
        b = two_sample_axis_test(*buildings, B=30, seed=8, workers=3)
        assert np.array_equal(a.cloud, b.cloud)

    def test_intervals_contain_zero_for_identical_groups(self, buildings):
        """A group compared with itself is not rejected."""
        result = two_sample_axis_test(buildings[0], buildings[0], B=60, seed=4)
        assert np.allclose(result.g, 0.0)
        assert all(row.lower <= 0.0 <= row.upper for row in result.intervals)
        assert result.report.verdict is Verdict.FAIL_TO_REJECT

    def test_building_means_are_not_separated(self, buildings):
        """At 93% the zero vector lies in all three intervals of 3 G(r*)."""
        result = two_sample_axis_test(*buildings, B=250, seed=1, alpha=0.07, scale=3.0)
        assert len(result.intervals) == 3
        assert all(row.lower <= 0.0 <= row.upper for row in result.intervals)
        assert result.report.verdict is Verdict.FAIL_TO_REJECT
        # the cloud is 3 G(r*) in plain units, so the intervals stay well inside (-1, 1)
        assert all(-1.0 < row.lower and row.upper < 1.0 for row in result.intervals)

    def test_needs_the_plane(self):
        """Shapes on RP^1 cannot be compared this way."""
        shapes = load_fixture("table1").shapes("education")
        with pytest.raises(ValueError, match="RP\\^2"):
            two_sample_axis_test(shapes, shapes, B=10, seed=0)

    def test_needs_two_observations(self, buildings):
        with pytest.raises(InsufficientData):
            two_sample_axis_test(buildings[0][:1], buildings[1], B=10, seed=0)
