"""
Command-line entry point.

    projshape <register|mean|test1|test2|rotcmp|calibrate|reproduce> [options]

Reports go to stdout (text, or JSON with --json); logs go to stderr. Every
failure maps to a stable exit code, see ``projshape.exceptions``.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from projshape.config import settings
from projshape.distributions import SCENARIOS
from projshape.exceptions import ProjShapeError, exit_code_for
from projshape.io.datasets import parse_dataset
from projshape.io.reports import render_json, render_text, write_report
from projshape.logging_config import configure_logging, logger
from projshape.models import Command, RegionMode, RunConfig
from projshape.workflows import REPRODUCE_TARGETS, run


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _mu0(text: str) -> List[List[float]]:
    """Axes separated by ';', coordinates by ','; e.g. '0.8,0.57,0.19'."""
    try:
        return [[float(v) for v in axis.split(",")] for axis in text.split(";") if axis.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected axes like 'a,b,c;d,e,f', got '{text}'")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=settings.alpha, help="Significance level")
    parser.add_argument("--B", type=int, default=None, help="Bootstrap resamples")
    parser.add_argument("--seed", type=int, default=settings.seed, help="Seed (default PROJSHAPE_SEED)")
    parser.add_argument("--workers", type=int, default=settings.workers, help="Threads for resampling")
    parser.add_argument("--out", type=Path, default=None, help="Directory for the report and artifacts")
    parser.add_argument("--json", dest="json_output", action="store_true", help="Print the report as JSON")
    parser.add_argument("--log-level", default=None, help="Log level for stderr")


def _add_dataset(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", type=Path, required=True, help="Landmark dataset (CSV or JSON)")
    parser.add_argument("--format", dest="input_format", choices=["csv", "json"], default=None)
    parser.add_argument("--frame", type=_int_list, default=None, help="0-based frame landmarks, e.g. 0,1,2,3")
    parser.add_argument("--groups", type=lambda s: s.split(","), default=None, help="Group names, comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projshape", description="Projective shape analysis of landmark data")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("register", "Registered axial coordinates of every view"),
        ("mean", "Extrinsic means and mean directions per group"),
    ):
        sub = commands.add_parser(name, help=help_text)
        _add_dataset(sub)
        _add_common(sub)

    test1 = commands.add_parser("test1", help="One-sample tests of a hypothesised mean")
    _add_dataset(test1)
    _add_common(test1)
    test1.add_argument("--mu0", type=_mu0, required=True, help="Hypothesised mean axes 'a,b,c;d,e,f'")
    test1.add_argument("--test", default=None, help="extrinsic, extrinsic-bootstrap, tangent, directional, ...")

    test2 = commands.add_parser("test2", help="Two-sample tests between two groups")
    _add_dataset(test2)
    _add_common(test2)
    test2.add_argument("--test", default=None, help="tangent, invariants or axis")
    test2.add_argument("--scale", type=float, default=None, help="Scale of the bootstrap cloud")

    rotcmp = commands.add_parser("rotcmp", help="Bootstrap comparison of two mean axes on RP^2")
    _add_dataset(rotcmp)
    _add_common(rotcmp)
    rotcmp.add_argument("--scale", type=float, default=None, help="Scale of the bootstrap cloud")

    calibrate = commands.add_parser("calibrate", help="Monte Carlo calibration of the test statistics")
    _add_common(calibrate)
    calibrate.add_argument("--scenario", choices=sorted(SCENARIOS), default=None)
    calibrate.add_argument("--m", type=int, default=1)
    calibrate.add_argument("--q", type=int, default=1)
    calibrate.add_argument("--n", type=int, default=50)
    calibrate.add_argument("--reps", type=int, default=2000)
    calibrate.add_argument("--kappa", type=float, default=100.0)

    reproduce = commands.add_parser("reproduce", help="Recompute a worked example from the embedded tables")
    reproduce.add_argument("target", choices=[*REPRODUCE_TARGETS, "all"])
    _add_common(reproduce)
    reproduce.add_argument("--scale", type=float, default=None, help="Scale of the bootstrap cloud")
    reproduce.add_argument("--mode", choices=[mode.value for mode in RegionMode], default=RegionMode.BONFERRONI.value)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {key: value for key, value in vars(args).items() if key != "log_level" and value is not None}
    if "input" in fields:
        fields["input"] = Path(fields["input"])
    return RunConfig(**fields)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(level=args.log_level)
    try:
        config = config_from_args(args)
        dataset = None
        if config.input is not None:
            dataset = parse_dataset(config.input, config.input_format)
        report = run(config, dataset)
        if config.out is not None:
            path = write_report(report, config.out, json_output=config.json_output)
            report.artifacts.append(str(path))
        sys.stdout.write(render_json(report) if config.json_output else render_text(report))
        return 0
    except ValidationError as e:
        logger.error("Invalid arguments", error=str(e))
        sys.stderr.write(f"error: {e}\n")
        return exit_code_for(e)
    except (ProjShapeError, ValueError, OSError) as e:
        logger.error("Command failed", command=args.command, error=str(e), error_type=type(e).__name__)
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
