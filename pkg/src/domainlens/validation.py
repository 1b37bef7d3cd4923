"""Input validation helpers shared by the estimator-style classes."""

from __future__ import annotations

import numpy as np

UNIT_NORM_ATOL = 1e-6


def as_float_matrix(X, dtype=np.float64) -> np.ndarray:
    """Coerce to a 2-D float array and reject non-finite values."""
    X = np.asarray(X, dtype=dtype)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {X.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"expected a non-empty matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains NaN or infinite values")
    return X


def check_dimension(X: np.ndarray, dimension: int) -> None:
    if X.shape[1] != dimension:
        raise ValueError(f"dimension mismatch: expected {dimension}, got {X.shape[1]}")


def check_unit_norm(X: np.ndarray, atol: float = UNIT_NORM_ATOL) -> None:
    """Verify every row has L2 norm 1 within tolerance."""
    norms = np.linalg.norm(X, axis=1)
    bad = np.abs(norms - 1.0) > atol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"row {i} is not unit-normalized (norm={norms[i]:.8f})")


def l2_normalize(X: np.ndarray) -> np.ndarray:
    """Row-wise L2 normalization; zero rows are left untouched."""
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return X / norms
