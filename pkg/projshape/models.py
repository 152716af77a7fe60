from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from projshape import tolerances


class Reference(str, Enum):
    CHI2 = "chi2"  # asymptotic chi-square
    F = "F"
    BOOTSTRAP = "bootstrap"


class Verdict(str, Enum):
    REJECT = "reject"
    FAIL_TO_REJECT = "fail to reject"


class Command(str, Enum):
    REGISTER = "register"
    MEAN = "mean"
    TEST1 = "test1"
    TEST2 = "test2"
    ROTCMP = "rotcmp"
    CALIBRATE = "calibrate"
    REPRODUCE = "reproduce"


class RegionMode(str, Enum):
    JOINT = "joint"
    BONFERRONI = "bonferroni"


class BootstrapInfo(BaseModel):
    seed: int = Field(..., description="Seed of the resampling substreams")
    resamples: int = Field(..., description="Number of bootstrap resamples B")
    rejected: int = Field(0, description="Degenerate resamples that were redrawn")


class TestReport(BaseModel):
    """Outcome of one hypothesis test, echoing every convention it depends on."""

    __test__ = False

    test: str = Field(..., description="Name of the procedure")
    statistic: float = Field(..., description="Observed value of the test statistic")
    reference: Reference = Field(..., description="Reference distribution")
    df: List[float] = Field(default_factory=list, description="Degrees of freedom of the reference")
    p_value: Optional[float] = Field(None, ge=0.0, le=1.0)
    asymptotic_p_value: Optional[float] = Field(None, ge=0.0, le=1.0)
    alpha: Optional[float] = Field(None, gt=0.0, le=1.0)
    verdict: Optional[Verdict] = None
    df_convention: Optional[str] = Field(None, description="How the degrees of freedom were derived")
    bootstrap: Optional[BootstrapInfo] = None
    flags: List[str] = Field(default_factory=list, description="Warnings raised while computing the test")
    details: Dict[str, Any] = Field(default_factory=dict)
    tolerances: Dict[str, float] = Field(default_factory=tolerances.as_dict)

    @model_validator(mode="after")
    def fill_verdict(self) -> "TestReport":
        if self.verdict is None and self.alpha is not None and self.p_value is not None:
            self.verdict = Verdict.REJECT if self.p_value < self.alpha else Verdict.FAIL_TO_REJECT
        return self


class IntervalRow(BaseModel):
    coordinate: str
    lower: float
    upper: float

    @property
    def contains_zero(self) -> bool:
        return self.lower <= 0.0 <= self.upper


class CalibrationReport(BaseModel):
    scenario: str
    statistic: str
    reference: Reference
    df: List[float]
    m: int
    q: int
    n: int
    kappa: float
    reps: int
    seed: int
    completed: int = Field(..., description="Replications that produced a statistic")
    degenerate: int = Field(0, description="Replications whose statistic was undefined")
    exceedance_95: Optional[float] = None
    se_95: Optional[float] = None
    exceedance_99: Optional[float] = None
    se_99: Optional[float] = None


class SectionReport(BaseModel):
    """A titled block of a workflow report: a table and/or a list of tests."""

    title: str
    columns: List[str] = Field(default_factory=list)
    rows: List[List[Any]] = Field(default_factory=list)
    values: Dict[str, Any] = Field(default_factory=dict)
    tests: List[TestReport] = Field(default_factory=list)


class RunReport(BaseModel):
    command: str
    dataset: Optional[str] = None
    seed: Optional[int] = None
    resamples: Optional[int] = None
    sections: List[SectionReport] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)
    tolerances: Dict[str, float] = Field(default_factory=tolerances.as_dict)


class RunConfig(BaseModel):
    """Validated parameters of one command-line invocation."""

    command: Command
    target: Optional[str] = Field(None, description="Example name for reproduce")
    input: Optional[Path] = None
    input_format: Optional[str] = Field(None, description="csv or json; inferred from the suffix when omitted")
    frame: Optional[List[int]] = Field(None, description="0-based frame landmark indices")
    test: Optional[str] = None
    groups: Optional[List[str]] = None
    mu0: Optional[List[List[float]]] = None
    alpha: float = Field(0.05, gt=0.0, lt=1.0)
    B: Optional[int] = Field(None, ge=0, description="Bootstrap resamples; command default when omitted")
    seed: int = Field(..., ge=0)
    workers: int = Field(1, ge=1)
    scale: Optional[float] = Field(None, gt=0.0)
    mode: RegionMode = RegionMode.BONFERRONI
    out: Optional[Path] = None
    json_output: bool = False
    scenario: Optional[str] = None
    m: int = Field(1, ge=1)
    q: int = Field(1, ge=1)
    n: int = Field(50, ge=2)
    reps: int = Field(2000, ge=1)
    kappa: float = Field(100.0, ge=0.0)

    @field_validator("frame")
    @classmethod
    def frame_distinct(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and len(set(v)) != len(v):
            raise ValueError("Frame indices must be distinct")
        if v is not None and any(i < 0 for i in v):
            raise ValueError("Frame indices must be nonnegative")
        return v

    @field_validator("input_format")
    @classmethod
    def known_format(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in ("csv", "json"):
            raise ValueError("Format must be csv or json")
        return v
