"""
Command workflows: dispatch a validated RunConfig to the statistics modules
and collect the results into a RunReport, plus the reproductions of the
worked examples shipped as fixtures.
"""

from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from projshape.config import settings
from projshape.distributions import SCENARIOS, calibration_harness
from projshape.extrinsic import bootstrap_extrinsic_report, extrinsic_mean, frechet_function, one_sample_extrinsic_test
from projshape.io.datasets import LandmarkDataset, LandmarkGroup, LandmarkView, serialize_dataset
from projshape.io.fixtures import load_fixture
from projshape.io.plots import emit_scatter, scale_label
from projshape.models import Command, RunConfig, RunReport, SectionReport, TestReport
from projshape.projective_core import (
    AxialPoint,
    ProjectiveFrame,
    axial_angle_and_double,
    cross_ratio,
    invariants_from_axial,
    projective_coordinate_details,
)
from projshape.rotation_compare import AxisTestResult, aligning_rotation, rotation_axis_H, two_sample_axis_test
from projshape.shape_space import (
    Configuration,
    DirectionalSample,
    ProjectiveShape,
    assemble_sample,
    pooled_alignment,
    register,
)
from projshape.tangent_stats import (
    bootstrap_confidence_region,
    bootstrap_directional_test,
    directional_t_squared,
    euclidean_two_sample_hotelling,
    mean_directions,
    one_sample_hotelling,
    two_sample_hotelling,
    watson_williams,
)
from projshape.validators import DatasetValidator, RunConfigValidator

logger = structlog.get_logger(__name__)

ONE_SAMPLE_TESTS = (
    "extrinsic",
    "extrinsic-bootstrap",
    "tangent",
    "directional",
    "directional-bootstrap",
    "watson-williams",
)
TWO_SAMPLE_TESTS = ("tangent", "invariants", "axis")
REPRODUCE_TARGETS = ("ex2.1", "ex4.1", "ex5.1", "ex5.2", "ex5.3")


# Shape-space dimensions


def group_dimension(kind: str, m: int) -> int:
    """Dimension of the similarity, affine or projective group acting on R^m."""
    dimensions = {"similarity": m * (m + 1) // 2 + 1, "affine": m * (m + 1), "projective": m * (m + 2)}
    if kind not in dimensions:
        raise ValueError(f"Unknown shape type '{kind}'; choose similarity, affine or projective")
    return dimensions[kind]


def shape_space_dimension(kind: str, m: int, k: int) -> int:
    """
    Dimension of the shape space of generic k-ads in R^m under similarity,
    affine or projective transformations: mk minus the group dimension.

    The projective value m(k - m - 2) equals M, the chi-square degrees of
    freedom of the extrinsic tests.

    Raises:
        ValueError: for an unknown kind or when k is too small for the group
    """
    if m < 1:
        raise ValueError(f"Dimension m must be positive, got {m}")
    dimension = m * k - group_dimension(kind, m)
    if dimension < 1:
        raise ValueError(f"{kind} shapes of {k} points in R^{m} form a degenerate space")
    return dimension


# Helpers


def _resamples(config: RunConfig, default: Optional[int] = None) -> int:
    B = config.B if config.B is not None else (default or settings.bootstrap_resamples)
    return RunConfigValidator.validate_resamples(B, required=True)


def _coordinate_columns(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{j}" for j in range(1, count + 1)]


def _require_dataset(config: RunConfig, dataset: Optional[LandmarkDataset]) -> LandmarkDataset:
    if dataset is None:
        raise ValueError(f"Command '{config.command.value}' needs an input dataset (--input)")
    return dataset


def _frame(config: RunConfig, dataset: LandmarkDataset) -> Optional[List[int]]:
    if dataset.pre_registered:
        return None
    return DatasetValidator.validate_frame(config.frame, dataset.m, dataset.k)


def _out_dir(config: RunConfig) -> Optional[Path]:
    if config.out is None:
        return None
    config.out.mkdir(parents=True, exist_ok=True)
    return config.out


# Generic commands


def _register(config: RunConfig, dataset: LandmarkDataset) -> RunReport:
    frame = _frame(config, dataset)
    names = config.groups or dataset.group_names
    m1 = dataset.m + 1
    rows = []
    groups = []
    for name in names:
        views = []
        for view, shape in zip(dataset.group(name).views, dataset.shapes(name, frame)):
            axes = [axis.canonical() for axis in shape.axes]
            for s, axis in enumerate(axes, start=1):
                rows.append([name, view.view, s, *axis.tolist()])
            views.append(LandmarkView(view=view.view, landmarks=[axis.tolist() for axis in axes]))
        groups.append(LandmarkGroup(name=name, views=views))

    artifacts = []
    out = _out_dir(config)
    if out is not None:
        used = frame if frame is not None else list(range(dataset.m + 2))
        registered = LandmarkDataset(
            name=f"{dataset.name}-registered",
            m=dataset.m,
            k=dataset.k,
            pre_registered=True,
            frame=",".join(str(i + 1) for i in used),
            provenance=dataset.provenance,
            groups=groups,
        )
        artifacts.append(str(serialize_dataset(registered, out / "registered.csv")))
    section = SectionReport(
        title="registered coordinates",
        columns=["group", "view", "axis", *_coordinate_columns("z", m1)],
        rows=rows,
    )
    return RunReport(command=config.command.value, dataset=dataset.name, sections=[section], artifacts=artifacts)


def _mean(config: RunConfig, dataset: LandmarkDataset) -> RunReport:
    frame = _frame(config, dataset)
    names = config.groups or dataset.group_names
    m1 = dataset.m + 1
    extrinsic_rows, direction_rows = [], []
    values: Dict[str, float] = {}
    for name in names:
        shapes = dataset.shapes(name, frame)
        mean = extrinsic_mean(shapes)
        for s, axis in enumerate(mean.axes):
            extrinsic_rows.append([name, s + 1, *axis.canonical().tolist(), float(mean.eigen.gaps[s])])
        values[f"{name} Frechet function at mean"] = frechet_function(shapes, mean.axes)
        directions = mean_directions(assemble_sample(shapes))
        for s in range(directions.q):
            direction_rows.append([name, s + 1, *directions.mu[s].tolist(), float(directions.rbar[s])])
    sections = [
        SectionReport(
            title="extrinsic means",
            columns=["group", "axis", *_coordinate_columns("z", m1), "gap"],
            rows=extrinsic_rows,
            values=values,
        ),
        SectionReport(
            title="mean directions",
            columns=["group", "axis", *_coordinate_columns("mu", m1), "rbar"],
            rows=direction_rows,
        ),
    ]
    return RunReport(command=config.command.value, dataset=dataset.name, sections=sections)


def _one_sample_tests(config: RunConfig, dataset: LandmarkDataset) -> RunReport:
    (name,) = DatasetValidator.validate_groups(config.groups, dataset.group_names, 1)
    shapes = dataset.shapes(name, _frame(config, dataset))
    q = shapes[0].q
    mu0 = RunConfigValidator.validate_mu0(config.mu0, q, dataset.m)
    if config.test is not None:
        if config.test not in ONE_SAMPLE_TESTS:
            raise ValueError(f"Unknown one-sample test '{config.test}'; choose one of {list(ONE_SAMPLE_TESTS)}")
        selected = [config.test]
    else:
        selected = ["extrinsic", "tangent", "directional"]
        if dataset.m == 1 and q == 1:
            selected.append("watson-williams")

    sample = assemble_sample(shapes)
    uses_bootstrap = any(test.endswith("bootstrap") for test in selected)
    B = _resamples(config) if uses_bootstrap else None
    tests: List[TestReport] = []
    for test in selected:
        if test == "extrinsic":
            tests.append(one_sample_extrinsic_test(shapes, mu0, alpha=config.alpha))
        elif test == "extrinsic-bootstrap":
            tests.append(bootstrap_extrinsic_report(shapes, mu0, B, config.seed, config.alpha, config.workers))
        elif test == "tangent":
            tests.append(one_sample_hotelling(sample, mu0, alpha=config.alpha))
        elif test == "directional":
            tests.append(directional_t_squared(sample, mu0, alpha=config.alpha))
        elif test == "directional-bootstrap":
            tests.append(bootstrap_directional_test(sample, mu0, B, config.seed, config.alpha, config.workers))
        else:
            if dataset.m != 1 or q != 1:
                raise ValueError("The Watson-Williams test needs m = 1 and a single registered axis")
            angles = [axial_angle_and_double(shape.axes[0])[1] for shape in shapes]
            theta0 = axial_angle_and_double(AxialPoint.from_vector(mu0[0]))[1]
            tests.append(watson_williams(angles, theta0, alpha=config.alpha))
    section = SectionReport(title=f"one-sample tests ({name})", values={"mu0": mu0.tolist()}, tests=tests)
    return RunReport(
        command=config.command.value,
        dataset=dataset.name,
        seed=config.seed if uses_bootstrap else None,
        resamples=B,
        sections=[section],
    )


def _axis_comparison(
    config: RunConfig,
    first: Sequence[ProjectiveShape],
    second: Sequence[ProjectiveShape],
    B: int,
    scale: Optional[float],
    label: str,
) -> Tuple[SectionReport, AxisTestResult]:
    result = two_sample_axis_test(
        first, second, B, config.seed, alpha=config.alpha, scale=scale, workers=config.workers
    )
    prefix = scale_label(result.scale)
    rows = [[f"{prefix}{row.coordinate}", row.lower, row.upper, row.contains_zero] for row in result.intervals]
    return SectionReport(
        title=f"mean axis comparison ({label})",
        columns=["coordinate", "lower", "upper", "contains 0"],
        rows=rows,
        values={"H": result.h.h.tolist(), "G": result.g.tolist()},
        tests=[result.report],
    ), result


def _emit_cloud(config: RunConfig, cloud: np.ndarray, scale: float, name: str) -> List[str]:
    out = _out_dir(config)
    if out is None:
        return []
    return [str(path) for path in emit_scatter(cloud, out / name, scale=scale, title="bootstrap rotation coordinates")]


def _two_sample_tests(config: RunConfig, dataset: LandmarkDataset) -> RunReport:
    first_name, second_name = DatasetValidator.validate_groups(config.groups, dataset.group_names, 2)
    frame = _frame(config, dataset)
    first = dataset.shapes(first_name, frame)
    second = dataset.shapes(second_name, frame)
    if config.command is Command.ROTCMP:
        selected = ["axis"]
    elif config.test is not None:
        if config.test not in TWO_SAMPLE_TESTS:
            raise ValueError(f"Unknown two-sample test '{config.test}'; choose one of {list(TWO_SAMPLE_TESTS)}")
        selected = [config.test]
    else:
        selected = ["tangent", "invariants"]

    label = f"{first_name} vs {second_name}"
    sections: List[SectionReport] = []
    artifacts: List[str] = []
    B = None
    for test in selected:
        if test == "tangent":
            report = two_sample_hotelling(first, second, alpha=config.alpha)
            sections.append(SectionReport(title=f"tangent Hotelling ({label})", tests=[report]))
        elif test == "invariants":
            inv1 = [np.concatenate([invariants_from_axial(axis).iota for axis in shape.axes]) for shape in first]
            inv2 = [np.concatenate([invariants_from_axial(axis).iota for axis in shape.axes]) for shape in second]
            report = euclidean_two_sample_hotelling(inv1, inv2, alpha=config.alpha)
            sections.append(SectionReport(title=f"Hotelling on invariants ({label})", tests=[report]))
        else:
            if dataset.m != 2:
                raise ValueError("Mean axis comparison is defined for m = 2")
            B = _resamples(config)
            section, result = _axis_comparison(config, first, second, B, config.scale, label)
            sections.append(section)
            artifacts.extend(_emit_cloud(config, result.cloud, result.scale, "axis_cloud"))
    return RunReport(
        command=config.command.value,
        dataset=dataset.name,
        seed=config.seed if B is not None else None,
        resamples=B,
        sections=sections,
        artifacts=artifacts,
    )


def _calibrate(config: RunConfig) -> RunReport:
    scenarios = [config.scenario] if config.scenario else sorted(SCENARIOS)
    sections = []
    for scenario in scenarios:
        report = calibration_harness(
            scenario,
            n=config.n,
            reps=config.reps,
            seed=config.seed,
            m=config.m,
            q=config.q,
            kappa=config.kappa,
            workers=config.workers,
        )
        sections.append(SectionReport(title=f"calibration: {scenario}", values=report.model_dump(mode="json")))
    return RunReport(command=config.command.value, seed=config.seed, sections=sections)


# Worked examples


def _example_2_1(config: RunConfig) -> List[SectionReport]:
    dataset = load_fixture("example21")
    rows = []
    for view, arr in zip(dataset.group("scene").views, dataset.arrays("scene")):
        frame = ProjectiveFrame.from_points(arr[:4])
        details = projective_coordinate_details(arr[4], frame)
        rows.append([view.view, *frame.beta.tolist(), *details.z.canonical().tolist()])
    return [
        SectionReport(
            title="ex2.1 registration of two images",
            columns=["view", "v1", "v2", "v3", "z1", "z2", "z3"],
            rows=rows,
        )
    ]


def _example_4_1(config: RunConfig) -> List[SectionReport]:
    dataset = load_fixture("example21")
    shapes = dataset.shapes("scene", [0, 1, 2, 3])
    mean = extrinsic_mean(shapes)
    axis = mean.axes[0].canonical()
    return [
        SectionReport(
            title="ex4.1 extrinsic mean of the two images",
            columns=["z1", "z2", "z3"],
            rows=[axis.tolist()],
            values={"Frechet function at mean": frechet_function(shapes, mean.axes), "gap": float(mean.eigen.gaps[0])},
        )
    ]


def _example_5_1(config: RunConfig) -> List[SectionReport]:
    dataset = load_fixture("table1")
    B = _resamples(config, 5000)
    rows, thetas = [], []
    for view, arr in zip(dataset.group("education").views, dataset.arrays("education")):
        x = arr[:, 0]
        c = float(cross_ratio(*x))
        phi, theta = axial_angle_and_double(register(Configuration(arr), [0, 1, 2]).axes[0])
        rows.append([view.view, *x.tolist(), c, phi, theta])
        thetas.append(theta)
    equidistant = register(Configuration(np.arange(4.0)), [0, 1, 2])
    _, theta0 = axial_angle_and_double(equidistant.axes[0])
    c0 = float(cross_ratio(0.0, 1.0, 2.0, 3.0))

    angles = np.array(thetas)
    directions = DirectionalSample(np.column_stack([np.cos(angles), np.sin(angles)]))
    target = np.array([[np.cos(theta0), np.sin(theta0)]])
    tests = [
        watson_williams(angles, theta0, alpha=config.alpha),
        one_sample_hotelling(directions, target, alpha=config.alpha),
        bootstrap_directional_test(directions, target, B, config.seed, config.alpha, config.workers),
    ]
    return [
        SectionReport(
            title="ex5.1 cross-ratios and doubled angles",
            columns=["view", "x1", "x2", "x3", "x4", "c", "phi", "theta"],
            rows=rows,
            values={"c0": c0, "theta0": theta0},
        ),
        SectionReport(title="ex5.1 equidistance tests", tests=tests),
    ]


def _example_5_2(config: RunConfig) -> Tuple[List[SectionReport], AxisTestResult]:
    dataset = load_fixture("table2")
    B = _resamples(config, 250)
    scale = config.scale if config.scale is not None else 3.0
    education, careers = dataset.shapes("education"), dataset.shapes("careers")
    first, second = pooled_alignment(education, careers)

    direction_rows = []
    for name, data in (("education", first), ("careers", second), ("pooled", np.concatenate([first, second]))):
        directions = mean_directions(DirectionalSample(data))
        direction_rows.append([name, *directions.mu[0].tolist(), float(directions.rbar[0])])

    mean_rows, means = [], []
    for name, shapes in (("education", education), ("careers", careers)):
        axis = extrinsic_mean(shapes).axes[0].canonical()
        means.append(axis)
        mean_rows.append([name, *axis.tolist()])
    h = rotation_axis_H(aligning_rotation(means[0], means[1]))

    invariant_rows = []
    for name, shapes in (("education", education), ("careers", careers)):
        for view, shape in zip(dataset.group(name).views, shapes):
            invariant_rows.append([name, view.view, *invariants_from_axial(shape.axes[0]).iota.tolist()])
    inv1 = [invariants_from_axial(shape.axes[0]) for shape in education]
    inv2 = [invariants_from_axial(shape.axes[0]) for shape in careers]

    axis_section, result = _axis_comparison(config, education, careers, B, scale, "education vs careers")
    axis_section.title = "ex5.2 " + axis_section.title
    return [
        SectionReport(
            title="ex5.2 mean directions",
            columns=["group", "mu1", "mu2", "mu3", "rbar"],
            rows=direction_rows,
            tests=[two_sample_hotelling(education, careers, alpha=config.alpha)],
        ),
        SectionReport(
            title="ex5.2 extrinsic means",
            columns=["group", "z1", "z2", "z3"],
            rows=mean_rows,
            values={"H": h.h.tolist()},
        ),
        axis_section,
        SectionReport(
            title="ex5.2 projective invariants",
            columns=["group", "view", "iota1", "iota2"],
            rows=invariant_rows,
            tests=[euclidean_two_sample_hotelling(inv1, inv2, alpha=config.alpha)],
        ),
    ], result


def _example_5_3(config: RunConfig) -> List[SectionReport]:
    dataset = load_fixture("table3")
    B = _resamples(config, 1500)
    frontal, side = dataset.shapes("frontal"), dataset.shapes("side")
    first, second = pooled_alignment(frontal, side)
    frontal_sample, side_sample = DirectionalSample(first), DirectionalSample(second)

    rows = []
    by_group = {}
    for name, data in (("frontal", first), ("side", second), ("combined", np.concatenate([first, second]))):
        directions = mean_directions(DirectionalSample(data))
        by_group[name] = directions
        for s in range(directions.q):
            rows.append([name, s + 1, *directions.mu[s].tolist(), float(directions.rbar[s])])

    target = by_group["side"].mu
    component_tests = [
        directional_t_squared(frontal_sample, target, components=[s], alpha=config.alpha) for s in range(2)
    ]
    region = bootstrap_confidence_region(frontal_sample, B, config.seed, config.alpha, config.mode, config.workers)
    observed = region.statistics(target)
    return [
        SectionReport(
            title="ex5.3 mean directions",
            columns=["group", "axis", "mu1", "mu2", "mu3", "rbar"],
            rows=rows,
            tests=[two_sample_hotelling(frontal_sample, side_sample, alpha=config.alpha)],
        ),
        SectionReport(title="ex5.3 per-component directional statistics", tests=component_tests),
        SectionReport(
            title=f"ex5.3 bootstrap confidence region ({region.mode.value})",
            columns=["statistic", "observed", "threshold"],
            rows=[[f"T{j + 1}2", float(observed[j]), float(region.thresholds[j])] for j in range(observed.size)],
            values={"side means inside region": region.contains(target), "B": B, "alpha": region.alpha},
        ),
    ]


def _reproduce_one(target: str, config: RunConfig) -> RunReport:
    artifacts: List[str] = []
    if target == "ex2.1":
        sections, B = _example_2_1(config), None
    elif target == "ex4.1":
        sections, B = _example_4_1(config), None
    elif target == "ex5.1":
        sections, B = _example_5_1(config), _resamples(config, 5000)
    elif target == "ex5.2":
        sections, result = _example_5_2(config)
        B = _resamples(config, 250)
        artifacts = _emit_cloud(config, result.cloud, result.scale, "ex5.2_cloud")
    elif target == "ex5.3":
        sections, B = _example_5_3(config), _resamples(config, 1500)
    else:
        raise ValueError(f"Unknown example '{target}'; choose one of {list(REPRODUCE_TARGETS) + ['all']}")
    return RunReport(
        command=f"reproduce {target}",
        seed=config.seed if B is not None else None,
        resamples=B,
        sections=sections,
        artifacts=artifacts,
    )


def reproduce(config: RunConfig) -> RunReport:
    """Recompute a worked example (or ``all`` of them) from the embedded fixtures."""
    target = config.target or "all"
    logger.info("Reproducing example", target=target, seed=config.seed)
    if target != "all":
        return _reproduce_one(target, config)
    reports = [_reproduce_one(name, config) for name in REPRODUCE_TARGETS]
    return RunReport(
        command="reproduce all",
        seed=config.seed,
        sections=[section for report in reports for section in report.sections],
        artifacts=[artifact for report in reports for artifact in report.artifacts],
    )


COMMANDS: Dict[Command, Callable[[RunConfig, LandmarkDataset], RunReport]] = {
    Command.REGISTER: _register,
    Command.MEAN: _mean,
    Command.TEST1: _one_sample_tests,
    Command.TEST2: _two_sample_tests,
    Command.ROTCMP: _two_sample_tests,
}


def run(config: RunConfig, dataset: Optional[LandmarkDataset] = None) -> RunReport:
    """
    Execute one command.

    Raises:
        ValueError: for missing inputs or invalid selections
        ProjShapeError: any analysis failure, propagated with its exit code
    """
    RunConfigValidator.validate_alpha(config.alpha)
    RunConfigValidator.validate_workers(config.workers)
    logger.info("Running command", command=config.command.value, dataset=dataset.name if dataset else None)
    if config.command is Command.CALIBRATE:
        return _calibrate(config)
    if config.command is Command.REPRODUCE:
        return reproduce(config)
    return COMMANDS[config.command](config, _require_dataset(config, dataset))
