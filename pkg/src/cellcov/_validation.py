"""Input validation helpers shared across the package."""

import numpy as np


def as_data_matrix(X, *, allow_nan=True, name="X"):
    """Coerce to a 2-d float64 array.

    NaN marks a missing cell and is allowed by default; infinities are
    always rejected.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if np.isinf(arr).any():
        raise ValueError(f"{name} contains infinite values")
    if not allow_nan and np.isnan(arr).any():
        raise ValueError(f"{name} contains NaN values")
    return arr


def check_square_symmetric(a, *, tol=1e-8, name="matrix"):
    """Validate a finite square symmetric matrix; returns an exactly
    symmetrized float64 copy."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite")
    scale = max(1.0, np.abs(arr).max())
    if np.abs(arr - arr.T).max() > tol * scale:
        raise ValueError(f"{name} is not symmetric within tolerance {tol}")
    return symmetrize(arr)


def symmetrize(a):
    """Enforce exact symmetry, averaging the off-diagonal pair."""
    return (a + a.T) / 2.0


def check_in_open_closed(x, low, high, name):
    """Validate a scalar in the interval (low, high]."""
    x = float(x)
    if not (low < x <= high):
        raise ValueError(f"{name} must lie in ({low}, {high}], got {x}")
    return x


def check_in_closed(x, low, high, name):
    """Validate a scalar in the interval [low, high]."""
    x = float(x)
    if not (low <= x <= high):
        raise ValueError(f"{name} must lie in [{low}, {high}], got {x}")
    return x


def check_positive_int(x, name):
    x = int(x)
    if x < 1:
        raise ValueError(f"{name} must be a positive integer, got {x}")
    return x


def check_positive(x, name):
    x = float(x)
    if not x > 0:
        raise ValueError(f"{name} must be positive, got {x}")
    return x
