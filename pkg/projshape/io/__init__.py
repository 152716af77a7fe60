from projshape.io.datasets import (
    LandmarkDataset,
    LandmarkGroup,
    LandmarkView,
    dataset_to_csv,
    parse_dataset,
    parse_dataset_text,
    serialize_dataset,
)
from projshape.io.fixtures import fixture_names, load_fixture

__all__ = [
    "LandmarkDataset",
    "LandmarkGroup",
    "LandmarkView",
    "dataset_to_csv",
    "fixture_names",
    "load_fixture",
    "parse_dataset",
    "parse_dataset_text",
    "serialize_dataset",
]
