"""
Landmark datasets: CSV and JSON ingestion, validation and serialization.

CSV files carry ``# key: value`` metadata lines followed by a table with
header ``group,view,landmark,x1[,x2[,x3...]]`` and one row per landmark.
Pre-registered datasets store registered axes instead of raw landmarks:
the ``landmark`` column then indexes the axis and rows hold m+1 coordinates.
"""

import io
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, Field, ValidationError, model_validator

from projshape.exceptions import DatasetParseError, DatasetValidationError
from projshape.shape_space import Configuration, ProjectiveShape, register
from projshape.validators import DatasetValidator

logger = structlog.get_logger(__name__)

KEY_COLUMNS = ["group", "view", "landmark"]
COORD_PATTERN = re.compile(r"^x(\d+)$")
METADATA_KEYS = ("name", "m", "k", "pre_registered", "frame", "source")


class LandmarkView(BaseModel):
    view: int = Field(..., description="View number within its group")
    landmarks: List[List[float]] = Field(..., description="Landmarks (or registered axes) in order")


class LandmarkGroup(BaseModel):
    name: str = Field(..., min_length=1)
    views: List[LandmarkView] = Field(default_factory=list)


class LandmarkDataset(BaseModel):
    """Named groups of views sharing the dimension m and landmark count k."""

    name: str
    m: int = Field(..., ge=1)
    k: int = Field(..., ge=3)
    pre_registered: bool = Field(False, description="Rows are registered axes rather than raw landmarks")
    frame: Optional[str] = Field(None, description="Note on the landmarks used as projective frame")
    provenance: str = ""
    groups: List[LandmarkGroup]

    @property
    def rows_per_view(self) -> int:
        return self.k - self.m - 2 if self.pre_registered else self.k

    @property
    def row_width(self) -> int:
        return self.m + 1 if self.pre_registered else self.m

    @model_validator(mode="after")
    def check_consistency(self) -> "LandmarkDataset":
        names = [group.name for group in self.groups]
        if len(set(names)) != len(names):
            raise ValueError(f"Group names must be unique, got {names}")
        if self.pre_registered and self.rows_per_view < 1:
            raise ValueError(f"Pre-registered data needs k >= m + 3, got k={self.k}, m={self.m}")
        for group in self.groups:
            if not group.views:
                raise ValueError(f"Group '{group.name}' has no views")
            for view in group.views:
                if len(view.landmarks) != self.rows_per_view:
                    raise ValueError(
                        f"Group '{group.name}' view {view.view} has {len(view.landmarks)} rows, "
                        f"expected {self.rows_per_view}"
                    )
                try:
                    DatasetValidator.validate_landmarks(view.landmarks, self.row_width, min_count=self.rows_per_view)
                except ValueError as e:
                    raise ValueError(f"Group '{group.name}' view {view.view}: {e}")
        return self

    @property
    def group_names(self) -> List[str]:
        return [group.name for group in self.groups]

    def group(self, name: str) -> LandmarkGroup:
        for group in self.groups:
            if group.name == name:
                return group
        raise ValueError(f"Unknown group '{name}'; dataset has {self.group_names}")

    def arrays(self, name: str) -> List[np.ndarray]:
        return [np.array(view.landmarks, dtype=float) for view in self.group(name).views]

    def configurations(self, name: str) -> List[Configuration]:
        if self.pre_registered:
            raise ValueError(f"Dataset '{self.name}' holds registered coordinates, not raw landmarks")
        return [Configuration(arr) for arr in self.arrays(name)]

    def shapes(self, name: str, frame_indices: Optional[Sequence[int]] = None) -> List[ProjectiveShape]:
        """Registered shapes of a group; raw views are registered against ``frame_indices``."""
        if self.pre_registered:
            if frame_indices is not None:
                logger.warning("Frame ignored for pre-registered data", dataset=self.name)
            return [ProjectiveShape.from_array(arr) for arr in self.arrays(name)]
        return [register(config, frame_indices) for config in self.configurations(name)]

    def to_frame(self) -> pd.DataFrame:
        records = []
        for group in self.groups:
            for view in group.views:
                for index, row in enumerate(view.landmarks, start=1):
                    records.append([group.name, view.view, index, *row])
        columns = KEY_COLUMNS + [f"x{j}" for j in range(1, self.row_width + 1)]
        return pd.DataFrame.from_records(records, columns=columns)


DatasetFormat = str


def _infer_format(path: Path, fmt: Optional[DatasetFormat]) -> DatasetFormat:
    if fmt:
        if fmt not in ("csv", "json"):
            raise ValueError(f"Unknown dataset format '{fmt}'")
        return fmt
    suffix = path.suffix.lower().lstrip(".")
    if suffix in ("csv", "json"):
        return suffix
    raise ValueError(f"Cannot infer dataset format from '{path.name}'; pass csv or json")


def _split_metadata(text: str) -> Tuple[Dict[str, str], List[str]]:
    metadata: Dict[str, str] = {}
    body: List[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            key, sep, value = stripped.lstrip("#").partition(":")
            if sep:
                metadata[key.strip().lower()] = value.strip()
        elif stripped:
            body.append(line)
    return metadata, body


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise DatasetParseError(f"Invalid boolean metadata value '{value}'")


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise DatasetParseError(f"Metadata '{key}' must be an integer, got '{value}'")


def _coordinate_columns(columns: Sequence[str]) -> List[str]:
    missing = [c for c in KEY_COLUMNS if c not in columns]
    if missing:
        raise DatasetParseError(f"Missing required columns {missing}; header is {list(columns)}", row=1)
    extra = [c for c in columns if c not in KEY_COLUMNS]
    numbers = []
    for column in extra:
        match = COORD_PATTERN.match(column)
        if not match:
            raise DatasetParseError(f"Unexpected column '{column}'", row=1)
        numbers.append(int(match.group(1)))
    if not numbers or sorted(numbers) != list(range(1, len(numbers) + 1)):
        raise DatasetParseError(f"Coordinate columns must be x1..xj, got {extra}", row=1)
    return [f"x{j}" for j in range(1, len(numbers) + 1)]


def _parse_csv(text: str, source: str) -> LandmarkDataset:
    metadata, body = _split_metadata(text)
    if not body:
        raise DatasetParseError(f"Dataset '{source}' is empty")
    try:
        frame = pd.read_csv(io.StringIO("\n".join(body)), float_precision="round_trip", dtype={"group": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DatasetParseError(f"Cannot parse '{source}': {e}")
    frame.columns = [str(c).strip() for c in frame.columns]
    coords = _coordinate_columns(list(frame.columns))
    if frame.empty:
        raise DatasetParseError(f"Dataset '{source}' has a header but no rows")

    null_rows = np.flatnonzero(frame[KEY_COLUMNS + coords].isna().any(axis=1).to_numpy())
    if null_rows.size:
        row = int(null_rows[0]) + 1
        raise DatasetParseError(f"Missing value in data row {row} of '{source}'", row=row)
    for column in ("view", "landmark"):
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = np.flatnonzero((values.isna() | (values != values.round())).to_numpy())
        if bad.size:
            row = int(bad[0]) + 1
            raise DatasetParseError(f"Column '{column}' must hold integers (data row {row})", row=row)
        frame[column] = values.astype(int)
    for column in coords:
        values = pd.to_numeric(frame[column], errors="coerce")
        bad = np.flatnonzero(values.isna().to_numpy())
        if bad.size:
            row = int(bad[0]) + 1
            raise DatasetParseError(f"Column '{column}' must be numeric (data row {row})", row=row)
        frame[column] = values.astype(float)

    pre_registered = _parse_bool(metadata["pre_registered"]) if "pre_registered" in metadata else False
    m = _parse_int("m", metadata["m"]) if "m" in metadata else len(coords) - (1 if pre_registered else 0)

    groups: List[LandmarkGroup] = []
    counts = set()
    for group_name in pd.unique(frame["group"]):
        rows = frame[frame["group"] == group_name]
        views = []
        for view_number in sorted(pd.unique(rows["view"])):
            view_rows = rows[rows["view"] == view_number].sort_values("landmark", kind="stable")
            indices = view_rows["landmark"].tolist()
            if indices != list(range(1, len(indices) + 1)):
                raise DatasetValidationError(
                    f"Group '{group_name}' view {view_number} has landmark indices {indices}, expected 1..{len(indices)}"
                )
            counts.add(len(indices))
            views.append(LandmarkView(view=int(view_number), landmarks=view_rows[coords].to_numpy().tolist()))
        groups.append(LandmarkGroup(name=str(group_name), views=views))

    if len(counts) > 1:
        raise DatasetValidationError(f"Views of '{source}' have inconsistent landmark counts {sorted(counts)}")
    rows_per_view = counts.pop()
    default_k = rows_per_view + m + 2 if pre_registered else rows_per_view
    k = _parse_int("k", metadata["k"]) if "k" in metadata else default_k

    try:
        return LandmarkDataset(
            name=metadata.get("name", Path(source).stem),
            m=m,
            k=k,
            pre_registered=pre_registered,
            frame=metadata.get("frame"),
            provenance=metadata.get("source", ""),
            groups=groups,
        )
    except ValidationError as e:
        raise DatasetValidationError(f"Invalid dataset '{source}': {e.errors()[0]['msg']}")


def _parse_json(text: str, source: str) -> LandmarkDataset:
    if not text.strip():
        raise DatasetParseError(f"Dataset '{source}' is empty")
    try:
        return LandmarkDataset.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        if first["type"] == "json_invalid":
            raise DatasetParseError(f"Cannot parse '{source}': {first['msg']}")
        location = ".".join(str(part) for part in first["loc"])
        raise DatasetValidationError(f"Invalid dataset '{source}' at {location or 'root'}: {first['msg']}")


def parse_dataset_text(text: str, fmt: DatasetFormat, source: str = "<memory>") -> LandmarkDataset:
    dataset = _parse_csv(text, source) if fmt == "csv" else _parse_json(text, source)
    logger.info(
        "Dataset loaded",
        source=source,
        groups={group.name: len(group.views) for group in dataset.groups},
        m=dataset.m,
        k=dataset.k,
    )
    return dataset


def parse_dataset(path: Union[str, Path], fmt: Optional[DatasetFormat] = None) -> LandmarkDataset:
    """
    Load a landmark dataset from CSV or JSON.

    Raises:
        DatasetParseError: if the file does not follow the schema (with the data row number)
        DatasetValidationError: if views disagree on k or groups are inconsistent
        OSError: if the file cannot be read
    """
    path = Path(path)
    resolved = _infer_format(path, fmt)
    return parse_dataset_text(path.read_text(encoding="utf-8"), resolved, source=str(path))


def dataset_to_csv(dataset: LandmarkDataset) -> str:
    lines = [
        f"# name: {dataset.name}",
        f"# m: {dataset.m}",
        f"# k: {dataset.k}",
        f"# pre_registered: {str(dataset.pre_registered).lower()}",
    ]
    if dataset.frame:
        lines.append(f"# frame: {dataset.frame}")
    if dataset.provenance:
        lines.append(f"# source: {dataset.provenance}")
    return "\n".join(lines) + "\n" + dataset.to_frame().to_csv(index=False)


def serialize_dataset(dataset: LandmarkDataset, path: Union[str, Path], fmt: Optional[DatasetFormat] = None) -> Path:
    path = Path(path)
    resolved = _infer_format(path, fmt)
    text = dataset_to_csv(dataset) if resolved == "csv" else dataset.model_dump_json(indent=2)
    path.write_text(text, encoding="utf-8")
    return path
