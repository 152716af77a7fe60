"""
Test cases for command workflows and worked-example reproductions.
"""

import numpy as np
import pytest

from projshape.io import load_fixture, parse_dataset
from projshape.models import RunConfig
from projshape.shape_space import Configuration, register
from projshape.workflows import group_dimension, reproduce, run, shape_space_dimension


def config(**fields):
    fields.setdefault("seed", 1)
    return RunConfig(**fields)


class TestDimensions:
    """Shape-space and group dimensions."""

    @pytest.mark.parametrize(
        "kind, expected, group",
        [("similarity", 6, 4), ("affine", 4, 6), ("projective", 2, 8)],
    )
    def test_planar_pentads(self, kind, expected, group):
        assert shape_space_dimension(kind, 2, 5) == expected
        assert group_dimension(kind, 2) == group

    def test_projective_line(self):
        assert shape_space_dimension("projective", 1, 4) == 1

    def test_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            shape_space_dimension("projective", 2, 4)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="Unknown shape type"):
            shape_space_dimension("conformal", 2, 5)
        with pytest.raises(ValueError, match="Unknown shape type"):
            group_dimension("conformal", 2)


class TestRun:
    """Dispatch of the dataset commands."""

    def test_needs_a_dataset(self):
        with pytest.raises(ValueError, match="needs an input dataset"):
            run(config(command="mean"))

    def test_mean(self):
        """Extrinsic means of both buildings."""
        report = run(config(command="mean"), load_fixture("table2"))
        rows = report.sections[0].rows
        assert rows[0][0] == "education"
        assert rows[0][2:5] == pytest.approx([0.8037, 0.5632, 0.1922], abs=5e-4)
        assert rows[1][2:5] == pytest.approx([0.7907, 0.5834, 0.1855], abs=5e-4)

    def test_two_sample_defaults(self):
        """Tangent and invariant tests run by default."""
        report = run(config(command="test2"), load_fixture("table2"))
        assert [section.tests[0].df for section in report.sections] == [[2.0, 6.0], [2.0, 6.0]]
        assert report.resamples is None

    def test_unknown_test(self):
        with pytest.raises(ValueError, match="Unknown two-sample test"):
            run(config(command="test2", test="median"), load_fixture("table2"))

    def test_rotation_comparison(self):
        report = run(config(command="rotcmp", B=20), load_fixture("table2"))
        assert report.resamples == 20
        assert len(report.sections[0].rows) == 3

    def test_one_sample_on_the_line(self):
        """The Watson-Williams test joins the defaults for m = 1."""
        mu0 = register(Configuration(np.arange(4.0)), [0, 1, 2]).axes[0].unit
        report = run(config(command="test1", mu0=[mu0.tolist()]), load_fixture("table1"))
        names = [test.test for test in report.sections[0].tests]
        assert names[-1] == "Watson-Williams"
        assert len(names) == 4

    def test_one_sample_needs_mu0(self):
        with pytest.raises(ValueError, match="--mu0"):
            run(config(command="test1"), load_fixture("table1"))

    def test_register_round_trip(self, tmp_path):
        """registered.csv holds the same shapes as the raw views."""
        dataset = load_fixture("table1")
        report = run(config(command="register", out=tmp_path), dataset)
        registered = parse_dataset(tmp_path / "registered.csv")
        assert registered.pre_registered
        assert report.artifacts == [str(tmp_path / "registered.csv")]
        assert registered.shapes("education") == dataset.shapes("education")

    def test_calibrate(self):
        report = run(config(command="calibrate", scenario="extrinsic", n=15, reps=10))
        values = report.sections[0].values
        assert values["completed"] + values["degenerate"] == 10


class TestReproduce:
    """Worked examples recomputed from the fixtures."""

    def test_equidistance_example(self):
        report = reproduce(config(command="reproduce", target="ex5.1", B=100))
        table, tests = report.sections
        assert table.values["c0"] == pytest.approx(4.0 / 3.0)
        assert table.values["theta0"] == pytest.approx(1.287, abs=5e-4)
        assert [row[5] for row in table.rows] == pytest.approx([1.340, 1.338, 1.353, 1.337, 1.373], abs=5e-3)
        assert tests.tests[0].test == "Watson-Williams"
        assert tests.tests[2].bootstrap.resamples == 100

    def test_watson_williams_matches_t_test(self):
        """On the line both parametric tests agree for these data."""
        report = reproduce(config(command="reproduce", target="ex5.1", B=20))
        watson, hotelling, _ = report.sections[1].tests
        assert watson.df == hotelling.df == [1.0, 4.0]

    def test_buildings_example(self):
        report = reproduce(config(command="reproduce", target="ex5.2", B=30))
        directions, means, axis, invariants = report.sections
        assert directions.tests[0].statistic == pytest.approx(2.6075, abs=5e-3)
        assert [row[4] for row in directions.rows] == pytest.approx([0.9997, 0.9979, 0.9988], abs=5e-4)
        h = np.array(means.values["H"])
        assert h * np.sign(h[0]) == pytest.approx([0.9997, -0.0077, 0.0029, 0.0231], abs=1e-3)
        assert axis.rows[0][0] == "3G1"
        assert invariants.rows[0][2:] == pytest.approx([4.739, 3.229], abs=5e-3)

    def test_faces_example(self):
        report = reproduce(config(command="reproduce", target="ex5.3", B=40, mode="joint"))
        region = report.sections[2]
        assert "joint" in region.title
        assert len(region.rows) == 1
        assert report.sections[0].tests[0].df == [4.0, 9.0]

    def test_unknown_target(self):
        with pytest.raises(ValueError, match="Unknown example"):
            reproduce(config(command="reproduce", target="ex9.9"))

    def test_resamples_required(self):
        with pytest.raises(ValueError, match="at least one"):
            reproduce(config(command="reproduce", target="ex5.3", B=0))
