"""
Numerical tolerances used throughout projshape.

Every threshold is scale-free: determinants and denominators are compared
after normalizing columns to unit norm, spectral gaps relative to the trace,
and covariance ranks relative to the largest eigenvalue.
"""

from typing import Dict

# Nonzero homogeneous vector
NONZERO_TOL = 1e-12
# Unit norm and equality modulo sign
UNIT_TOL = 1e-9
# Determinants and denominators after column normalization
DET_TOL = 1e-10
# Spectral gap of a moment matrix, relative to its trace
GAP_TOL = 1e-8
# Invertibility of G, relative to its largest eigenvalue
INVERTIBLE_TOL = 1e-12
# Rank cutoff for pseudo-inverses, relative to the largest eigenvalue
RANK_TOL = 1e-10
# Rotation angles treated as 0 or pi
ANGLE_TOL = 1e-8

# Jacobi sweeps stop once the off-diagonal norm drops below this fraction of ||J||_F
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
# Off-diagonal entries below this fraction of |a_pp| + |a_qq| are not rotated
JACOBI_SKIP_TOL = 1e-18

# Minimum |x . reference| accepted when sign-aligning axial data
ALIGNMENT_FLOOR = 0.1
# Mean resultant length below which tangent approximations are flagged
CONCENTRATION_WARNING = 0.9
# Slack for confidence-region membership
REGION_SLACK = 1e-9


def as_dict() -> Dict[str, float]:
    """Tolerances in effect, keyed by their short names, for reports."""
    return {
        "tau0_nonzero": NONZERO_TOL,
        "tau1_unit": UNIT_TOL,
        "tau2_det": DET_TOL,
        "tau3_gap": GAP_TOL,
        "tau4_invertible": INVERTIBLE_TOL,
        "tau5_rank": RANK_TOL,
        "tau6_angle": ANGLE_TOL,
    }
