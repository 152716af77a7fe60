"""Statistical analysis of projective shapes of landmark configurations."""

from projshape.exceptions import ProjShapeError
from projshape.extrinsic import extrinsic_mean, one_sample_extrinsic_test
from projshape.io import load_fixture, parse_dataset
from projshape.shape_space import assemble_sample, register
from projshape.tangent_stats import two_sample_hotelling
from projshape.workflows import run, shape_space_dimension

__version__ = "1.0.0"

__all__ = [
    "ProjShapeError",
    "assemble_sample",
    "extrinsic_mean",
    "load_fixture",
    "one_sample_extrinsic_test",
    "parse_dataset",
    "register",
    "run",
    "shape_space_dimension",
    "two_sample_hotelling",
]
