"""
Small dense linear algebra: a deterministic cyclic Jacobi eigensolver for
symmetric matrices and a rank-revealing pseudo-inverse for covariances.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import structlog

from projshape import tolerances

logger = structlog.get_logger(__name__)


def _schur2(a: np.ndarray, p: int, q: int) -> Tuple[float, float]:
    """
    Cosine-sine pair that annihilates a[p, q] (Golub and Van Loan, sym.schur2).

    Entries negligible against the diagonal are left alone, which keeps tau finite.
    """
    if abs(a[p, q]) <= tolerances.JACOBI_SKIP_TOL * (abs(a[p, p]) + abs(a[q, q])):
        return 1.0, 0.0
    tau = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
    if tau >= 0.0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2)))


def jacobi_eigh(
    matrix: np.ndarray,
    tol: float = tolerances.JACOBI_TOL,
    max_sweeps: int = tolerances.JACOBI_MAX_SWEEPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Args:
        matrix: square symmetric array
        tol: sweeps stop when the off-diagonal Frobenius norm is below
            ``tol * ||matrix||_F``
        max_sweeps: hard cap on the number of sweeps

    Returns:
        (eigenvalues ascending, eigenvectors as columns in matching order)

    Raises:
        ValueError: if the matrix is not square or not symmetric
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("Matrix contains non-finite entries")

    scale = float(np.linalg.norm(a, "fro"))
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-10 * max(scale, 1.0)):
        raise ValueError("Matrix is not symmetric")

    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if scale == 0.0:
        return np.zeros(n), v

    for sweep in range(max_sweeps):
        if _off_norm(a) < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                c, s = _schur2(a, p, q)
                if s == 0.0:
                    continue
                rot = np.eye(n)
                rot[p, p] = c
                rot[p, q] = s
                rot[q, p] = -s
                rot[q, q] = c
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    else:
        logger.warning("Jacobi sweeps exhausted", sweeps=max_sweeps, off_norm=_off_norm(a))

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


@dataclass(frozen=True)
class PseudoInverse:
    """Moore-Penrose inverse of a symmetric PSD matrix with its effective rank."""

    matrix: np.ndarray
    pinv: np.ndarray
    rank: int
    eigenvalues: np.ndarray

    @property
    def full_rank(self) -> bool:
        return self.rank == self.matrix.shape[0]


def symmetric_pinv(matrix: np.ndarray, rtol: float = tolerances.RANK_TOL) -> PseudoInverse:
    """
    Pseudo-inverse of a symmetric positive semidefinite matrix.

    Eigenvalues at or below ``rtol`` times the largest eigenvalue are treated
    as zero; their count determines the effective rank.
    """
    s = np.asarray(matrix, dtype=float)
    s = 0.5 * (s + s.T)
    values, vectors = np.linalg.eigh(s)
    top = float(values.max()) if values.size else 0.0
    if top <= 0.0:
        return PseudoInverse(matrix=s, pinv=np.zeros_like(s), rank=0, eigenvalues=values)
    keep = values > rtol * top
    inv_values = np.zeros_like(values)
    inv_values[keep] = 1.0 / values[keep]
    pinv = (vectors * inv_values) @ vectors.T
    return PseudoInverse(matrix=s, pinv=pinv, rank=int(np.count_nonzero(keep)), eigenvalues=values)


def is_invertible(matrix: np.ndarray, rtol: float = tolerances.INVERTIBLE_TOL) -> bool:
    """True when the smallest eigenvalue of a symmetric matrix exceeds ``rtol`` times the largest."""
    values = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    top = float(values.max())
    return top > 0.0 and float(values.min()) > rtol * top
