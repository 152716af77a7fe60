"""
Input validation for landmark data and command-line parameters.
"""

from typing import List, Optional, Sequence

import numpy as np

MAX_RESAMPLES = 1_000_000
MAX_WORKERS = 64


class DatasetValidator:
    """Validates landmark arrays and the selections made on them."""

    @staticmethod
    def validate_landmarks(
        landmarks: Sequence[Sequence[float]], m: int, min_count: Optional[int] = None
    ) -> np.ndarray:
        """
        Validate one view of landmarks.

        Args:
            landmarks: k rows of m coordinates
            m: Row width, the dimension of the ambient space for raw landmarks
            min_count: Fewest rows accepted, m + 3 by default

        Returns:
            Landmarks as a float array of shape (k, m)

        Raises:
            ValueError: If the shape is wrong or a coordinate is not finite
        """
        try:
            arr = np.asarray(landmarks, dtype=float)
        except ValueError:
            raise ValueError(f"Landmarks have the wrong width: rows differ in length, expected {m}")
        if arr.ndim == 1 and m == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[1] != m:
            raise ValueError(f"Landmarks have the wrong width: expected shape (k, {m}), got {arr.shape}")
        needed = m + 3 if min_count is None else min_count
        if arr.shape[0] < needed:
            raise ValueError(f"A configuration in R^{m} needs at least {needed} landmarks, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Landmarks have non-finite coordinates")
        return arr

    @staticmethod
    def validate_frame(frame: Optional[Sequence[int]], m: int, k: int) -> Optional[List[int]]:
        """
        Validate 0-based frame landmark indices.

        Raises:
            ValueError: If the count is not m + 2, indices repeat or fall outside 0..k-1
        """
        if frame is None:
            return None
        indices = [int(i) for i in frame]
        if len(indices) != m + 2:
            raise ValueError(f"A frame in RP^{m} needs {m + 2} landmarks, got {len(indices)}")
        if len(set(indices)) != len(indices):
            raise ValueError("Frame indices must be distinct")
        if any(i < 0 or i >= k for i in indices):
            raise ValueError(f"Frame indices must lie in 0..{k - 1}")
        return indices

    @staticmethod
    def validate_groups(requested: Optional[Sequence[str]], available: Sequence[str], count: int) -> List[str]:
        """
        Pick ``count`` group names, defaulting to the first ones in the dataset.

        Raises:
            ValueError: If a name is unknown or too few groups are available
        """
        names = list(requested) if requested else list(available[:count])
        unknown = [name for name in names if name not in available]
        if unknown:
            raise ValueError(f"Unknown groups {unknown}; dataset has {list(available)}")
        if len(names) != count:
            raise ValueError(f"This command needs {count} group(s), got {len(names)}")
        return names


class RunConfigValidator:
    """Validates numeric command-line parameters."""

    @staticmethod
    def validate_alpha(alpha: float) -> float:
        if not isinstance(alpha, (int, float)) or isinstance(alpha, bool):
            raise ValueError("alpha must be a number")
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        return float(alpha)

    @staticmethod
    def validate_resamples(B: int, required: bool = False) -> int:
        """
        Validate a bootstrap resample count.

        Raises:
            ValueError: If B is negative, too large, or zero where resampling is required
        """
        if not isinstance(B, int) or isinstance(B, bool):
            raise ValueError("Number of resamples must be an integer")
        if B < 0:
            raise ValueError("Number of resamples must be nonnegative")
        if required and B == 0:
            raise ValueError("This command needs at least one bootstrap resample")
        if B > MAX_RESAMPLES:
            raise ValueError(f"Number of resamples must not exceed {MAX_RESAMPLES}")
        return B

    @staticmethod
    def validate_workers(workers: int) -> int:
        if workers < 1 or workers > MAX_WORKERS:
            raise ValueError(f"Workers must lie in 1..{MAX_WORKERS}")
        return workers

    @staticmethod
    def validate_mu0(mu0: Optional[Sequence[Sequence[float]]], q: int, m: int) -> np.ndarray:
        """
        Validate a hypothesised mean of q axes in R^{m+1}.

        Raises:
            ValueError: If mu0 is missing, has the wrong shape or contains a zero axis
        """
        if mu0 is None:
            raise ValueError("A hypothesised mean (--mu0) is required")
        arr = np.asarray(mu0, dtype=float)
        if arr.shape != (q, m + 1):
            raise ValueError(f"mu0 must hold {q} axes of length {m + 1}, got shape {arr.shape}")
        norms = np.linalg.norm(arr, axis=1)
        if not np.all(np.isfinite(arr)) or np.any(norms <= 0.0):
            raise ValueError("mu0 axes must be finite and nonzero")
        return arr / norms[:, None]
