"""
Test cases for landmark dataset parsing, validation and serialization.
"""

import json

import pytest

from projshape.exceptions import DatasetParseError, DatasetValidationError
from projshape.io import (
    LandmarkDataset,
    dataset_to_csv,
    fixture_names,
    load_fixture,
    parse_dataset,
    parse_dataset_text,
    serialize_dataset,
)

LINE_CSV = """# name: line
# m: 1
group,view,landmark,x1
a,1,1,0.0
a,1,2,1.0
a,1,3,2.0
a,1,4,3.0
"""


class TestFixtures:
    """Embedded landmark tables."""

    def test_names(self):
        assert fixture_names() == ["example21", "table1", "table2", "table3"]

    def test_building_views(self):
        """Five views of four collinear landmarks."""
        dataset = load_fixture("table1")
        assert dataset.group_names == ["education"]
        assert len(dataset.group("education").views) == 5
        assert (dataset.m, dataset.k, dataset.pre_registered) == (1, 4, False)

    def test_registered_buildings(self):
        dataset = load_fixture("table2")
        assert dataset.pre_registered
        assert [len(dataset.group(g).views) for g in ("education", "careers")] == [5, 4]
        assert dataset.rows_per_view == 1 and dataset.row_width == 3

    def test_registered_faces(self):
        dataset = load_fixture("table3")
        assert [len(dataset.group(g).views) for g in ("frontal", "side")] == [7, 7]
        assert dataset.rows_per_view == 2

    def test_two_images(self):
        dataset = load_fixture("example21")
        arrays = dataset.arrays("scene")
        assert len(arrays) == 2
        assert arrays[0][4].tolist() == [344.0, 222.0]
        assert "(344,222)" in dataset.provenance

    def test_unknown_fixture(self):
        with pytest.raises(ValueError, match="Unknown fixture"):
            load_fixture("table9")

    def test_unknown_group(self):
        with pytest.raises(ValueError, match="Unknown group"):
            load_fixture("table2").group("library")

    def test_registered_data_has_no_configurations(self):
        with pytest.raises(ValueError, match="registered coordinates"):
            load_fixture("table2").configurations("education")


class TestRoundTrip:
    """Serialization preserves every coordinate exactly."""

    @pytest.mark.parametrize("name", ["table1", "table3"])
    @pytest.mark.parametrize("suffix", ["csv", "json"])
    def test_write_and_read(self, tmp_path, name, suffix):
        dataset = load_fixture(name)
        path = serialize_dataset(dataset, tmp_path / f"{name}.{suffix}")
        assert parse_dataset(path) == dataset

    def test_csv_text(self):
        dataset = parse_dataset_text(LINE_CSV, "csv")
        assert dataset.k == 4
        assert parse_dataset_text(dataset_to_csv(dataset), "csv") == dataset

    def test_explicit_format(self, tmp_path):
        path = tmp_path / "data.txt"
        path.write_text(LINE_CSV)
        assert parse_dataset(path, "csv").name == "line"

    def test_unknown_suffix(self, tmp_path):
        with pytest.raises(ValueError, match="Cannot infer dataset format"):
            parse_dataset(tmp_path / "data.txt")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            parse_dataset(tmp_path / "absent.csv")


class TestParseErrors:
    """Malformed files are reported with their location."""

    def test_empty(self):
        with pytest.raises(DatasetParseError, match="empty"):
            parse_dataset_text("", "csv")
        with pytest.raises(DatasetParseError, match="empty"):
            parse_dataset_text("   ", "json")

    def test_header_only(self):
        with pytest.raises(DatasetParseError, match="no rows"):
            parse_dataset_text("group,view,landmark,x1\n", "csv")

    def test_missing_value(self):
        """The first incomplete data row is reported."""
        text = LINE_CSV.replace("a,1,3,2.0", "a,1,3,")
        with pytest.raises(DatasetParseError) as info:
            parse_dataset_text(text, "csv")
        assert info.value.context["row"] == 3

    def test_non_numeric_coordinate(self):
        text = LINE_CSV.replace("a,1,2,1.0", "a,1,2,one")
        with pytest.raises(DatasetParseError, match="numeric") as info:
            parse_dataset_text(text, "csv")
        assert info.value.context["row"] == 2

    def test_non_integer_landmark(self):
        text = LINE_CSV.replace("a,1,4,3.0", "a,1,4.5,3.0")
        with pytest.raises(DatasetParseError, match="integers"):
            parse_dataset_text(text, "csv")

    def test_unexpected_column(self):
        text = LINE_CSV.replace("group,view,landmark,x1", "group,view,landmark,y1")
        with pytest.raises(DatasetParseError, match="Unexpected column"):
            parse_dataset_text(text, "csv")

    def test_missing_key_column(self):
        text = "# m: 1\ngroup,landmark,x1\na,1,0.0\n"
        with pytest.raises(DatasetParseError, match="Missing required columns"):
            parse_dataset_text(text, "csv")

    def test_invalid_json(self):
        with pytest.raises(DatasetParseError, match="Cannot parse"):
            parse_dataset_text("{not json", "json")


class TestValidationErrors:
    """Files that parse but are inconsistent."""

    def test_inconsistent_landmark_counts(self):
        text = LINE_CSV + "b,1,1,0.0\nb,1,2,1.0\nb,1,3,5.0\n"
        with pytest.raises(DatasetValidationError, match="inconsistent landmark counts"):
            parse_dataset_text(text, "csv")

    def test_gap_in_landmark_indices(self):
        text = LINE_CSV.replace("a,1,4,3.0", "a,1,5,3.0")
        with pytest.raises(DatasetValidationError, match="landmark indices"):
            parse_dataset_text(text, "csv")

    def test_width_disagrees_with_m(self):
        text = LINE_CSV.replace("# m: 1", "# m: 2")
        with pytest.raises(DatasetValidationError, match="wrong width"):
            parse_dataset_text(text, "csv")

    def test_duplicate_groups(self):
        group = {"name": "a", "views": [{"view": 1, "landmarks": [[0.0], [1.0], [2.0]]}]}
        payload = {"name": "dup", "m": 1, "k": 3, "groups": [group, group]}
        with pytest.raises(DatasetValidationError, match="unique"):
            parse_dataset_text(json.dumps(payload), "json")

    def test_json_row_count(self):
        payload = {"name": "short", "m": 1, "k": 4, "groups": [{"name": "a", "views": [{"view": 1, "landmarks": [[0.0]]}]}]}
        with pytest.raises(DatasetValidationError, match="expected 4"):
            parse_dataset_text(json.dumps(payload), "json")

    def test_json_ragged_rows(self):
        view = {"view": 2, "landmarks": [[0.0, 0.0], [1.0], [2.0, 1.0], [3.0, 5.0], [4.0, 2.0]]}
        payload = {"name": "ragged", "m": 2, "k": 5, "groups": [{"name": "a", "views": [view]}]}
        with pytest.raises(DatasetValidationError, match="view 2: Landmarks have the wrong width"):
            parse_dataset_text(json.dumps(payload), "json")

    def test_model_validation(self):
        with pytest.raises(ValueError, match="non-finite"):
            LandmarkDataset(
                name="nan",
                m=1,
                k=3,
                groups=[{"name": "a", "views": [{"view": 1, "landmarks": [[0.0], [float("nan")], [2.0]]}]}],
            )
