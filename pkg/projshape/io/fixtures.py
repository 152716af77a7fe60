"""Landmark tables shipped with the package."""

from importlib import resources
from typing import Dict, List

import structlog

from projshape.io.datasets import LandmarkDataset, parse_dataset_text

logger = structlog.get_logger(__name__)

FIXTURES: Dict[str, str] = {
    "table1": "table1.csv",
    "example21": "example21.csv",
    "table2": "table2.csv",
    "table3": "table3.csv",
}


def fixture_names() -> List[str]:
    return sorted(FIXTURES)


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise ValueError(f"Unknown fixture '{name}'; choose one of {fixture_names()}")
    return resources.files("projshape").joinpath("data", FIXTURES[name]).read_text(encoding="utf-8")


def load_fixture(name: str) -> LandmarkDataset:
    """Parse an embedded fixture by name, e.g. ``load_fixture("table2")``."""
    return parse_dataset_text(fixture_text(name), "csv", source=f"fixture:{name}")
