"""
Scatter output for bootstrap clouds of 3-vectors: a CSV of the points and
an SVG with the three orthogonal coordinate-plane projections.
"""

from pathlib import Path
from typing import List, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import structlog  # noqa: E402

logger = structlog.get_logger(__name__)

PROJECTIONS: Tuple[Tuple[int, int], ...] = ((0, 1), (0, 2), (1, 2))


def scale_label(scale: float) -> str:
    """'3' for a factor of 3.0, otherwise three significant digits."""
    return f"{scale:.0f}" if float(scale).is_integer() else f"{scale:.3g}"


def emit_scatter(
    points: Union[np.ndarray, Sequence[Sequence[float]]],
    path: Union[str, Path],
    scale: float = 1.0,
    title: str = "bootstrap cloud",
) -> List[Path]:
    """
    Write ``<path>.csv`` and ``<path>.svg`` for a cloud of already-scaled points.

    Axis labels read ``{scale}G1`` .. ``{scale}G3``. Output is byte-stable:
    the SVG carries no date and a fixed id salt.

    Raises:
        ValueError: if the cloud is empty or not made of 3-vectors
        OSError: if the files cannot be written
    """
    cloud = np.atleast_2d(np.asarray(points, dtype=float))
    if cloud.size == 0:
        raise ValueError("Cannot plot an empty cloud")
    if cloud.shape[1] != 3:
        raise ValueError(f"Expected 3-vectors, got shape {cloud.shape}")
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    prefix = "" if scale == 1.0 else scale_label(scale)
    labels = [f"{prefix}G{j}" for j in range(1, 4)]

    csv_path = base.parent / f"{base.name}.csv"
    pd.DataFrame(cloud, columns=labels).to_csv(csv_path, index=False, float_format="%.10g")

    svg_path = base.parent / f"{base.name}.svg"
    with matplotlib.rc_context({"svg.hashsalt": "projshape", "svg.fonttype": "none"}):
        fig, axs = plt.subplots(1, 3, figsize=(12, 4), tight_layout=True)
        for ax, (i, j) in zip(axs, PROJECTIONS):
            ax.scatter(cloud[:, i], cloud[:, j], s=6, color="tab:blue")
            ax.axhline(0.0, color="grey", linewidth=0.5)
            ax.axvline(0.0, color="grey", linewidth=0.5)
            ax.set_xlabel(labels[i], fontsize=12)
            ax.set_ylabel(labels[j], fontsize=12)
        fig.suptitle(title)
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info("Scatter written", points=int(cloud.shape[0]), csv=str(csv_path), svg=str(svg_path))
    return [csv_path, svg_path]
