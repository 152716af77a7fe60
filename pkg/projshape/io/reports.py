"""
Rendering of run reports as aligned plain text and as JSON.

Both renderings are deterministic for a fixed seed: no timestamps, and
floats are printed with fixed precision.
"""

from pathlib import Path
from typing import Any, Iterable, List, Union

import structlog

from projshape.models import RunReport, SectionReport, TestReport

logger = structlog.get_logger(__name__)


def format_value(value: Any, digits: int = 4) -> str:
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, float):
        if value != value:
            return "nan"
        if value == 0.0 or 1e-3 <= abs(value) < 1e6:
            return f"{value:.{digits}f}"
        return f"{value:.{digits}g}"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(format_value(v, digits) for v in value) + ")"
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _table(columns: List[str], rows: Iterable[List[Any]]) -> List[str]:
    cells = [columns] + [[format_value(v) for v in row] for row in rows]
    widths = [max(len(row[j]) for row in cells) for j in range(len(columns))]
    lines = []
    for index, row in enumerate(cells):
        lines.append("  ".join(cell.rjust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if index == 0:
            lines.append("  ".join("-" * w for w in widths))
    return lines


def _reference(test: TestReport) -> str:
    if not test.df:
        return test.reference.value
    return f"{test.reference.value}({', '.join(format_value(d, 0) if float(d).is_integer() else format_value(d) for d in test.df)})"


def render_test(test: TestReport) -> List[str]:
    lines = [f"test: {test.test}", f"  statistic: {format_value(test.statistic)}", f"  reference: {_reference(test)}"]
    if test.p_value is not None:
        lines.append(f"  p-value: {format_value(test.p_value)}")
    if test.asymptotic_p_value is not None:
        lines.append(f"  asymptotic p-value: {format_value(test.asymptotic_p_value)}")
    if test.alpha is not None:
        lines.append(f"  alpha: {format_value(test.alpha)}")
    if test.verdict is not None:
        lines.append(f"  verdict: {test.verdict.value}")
    if test.df_convention:
        lines.append(f"  df convention: {test.df_convention}")
    if test.bootstrap is not None:
        info = test.bootstrap
        lines.append(f"  bootstrap: seed={info.seed} B={info.resamples} rejected={info.rejected}")
    for key in sorted(test.details):
        if key == "intervals":
            continue
        lines.append(f"  {key}: {format_value(test.details[key])}")
    for flag in test.flags:
        lines.append(f"  flag: {flag}")
    return lines


def render_section(section: SectionReport) -> List[str]:
    lines = [f"== {section.title} =="]
    if section.columns:
        lines.extend(_table(section.columns, section.rows))
    for key, value in section.values.items():
        lines.append(f"{key}: {format_value(value)}")
    for test in section.tests:
        lines.extend(render_test(test))
    return lines


def render_text(report: RunReport) -> str:
    header = [f"projshape {report.command}"]
    if report.dataset:
        header.append(f"dataset={report.dataset}")
    if report.seed is not None:
        header.append(f"seed={report.seed}")
    if report.resamples is not None:
        header.append(f"B={report.resamples}")
    lines = ["  ".join(header)]
    for section in report.sections:
        lines.append("")
        lines.extend(render_section(section))
    if report.artifacts:
        lines.append("")
        lines.extend(f"artifact: {artifact}" for artifact in report.artifacts)
    lines.append("")
    lines.append("tolerances: " + " ".join(f"{k}={v:g}" for k, v in report.tolerances.items()))
    return "\n".join(lines) + "\n"


def render_json(report: RunReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def write_report(report: RunReport, directory: Union[str, Path], json_output: bool = False) -> Path:
    """Write ``report.txt`` (or ``report.json``) under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / ("report.json" if json_output else "report.txt")
    path.write_text(render_json(report) if json_output else render_text(report), encoding="utf-8")
    logger.info("Report written", path=str(path))
    return path
