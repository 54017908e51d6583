"""Dense symmetric matrix algebra: spectral decomposition, norms,
effective rank, elementwise and outer products.

All functions are pure and operate on plain float64 numpy arrays.
"""

from typing import NamedTuple

import numpy as np

from ._validation import check_square_symmetric, symmetrize


class Spectrum(NamedTuple):
    """Full spectral decomposition of a symmetric matrix.

    eigenvalues are sorted in descending order; eigenvectors holds the
    matching orthonormal eigenvectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh(a) -> Spectrum:
    """Spectral decomposition of a symmetric matrix, eigenvalues descending."""
    a = check_square_symmetric(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"eigendecomposition failed to converge for a {a.shape[0]}x{a.shape[0]} matrix"
        ) from exc
    order = np.argsort(w)[::-1]
    return Spectrum(w[order], v[:, order])


def operator_norm(a) -> float:
    """Largest absolute eigenvalue (spectral norm of a symmetric matrix)."""
    a = check_square_symmetric(a)
    try:
        w = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"eigendecomposition failed to converge for a {a.shape[0]}x{a.shape[0]} matrix"
        ) from exc
    return float(np.abs(w).max())


def frobenius_norm(a) -> float:
    """Square root of the sum of squared entries."""
    a = check_square_symmetric(a)
    return float(np.sqrt((a * a).sum()))


# Floating-point slack for the positive semi-definiteness precondition,
# relative to the operator norm.
PSD_TOL = 1e-9


def effective_rank(a) -> float:
    """trace(a) / operator_norm(a) for a PSD matrix within tolerance.

    The value lies in (0, rank(a)] and is small for matrices with
    rapidly decaying eigenvalues.
    """
    a = check_square_symmetric(a)
    w = np.linalg.eigvalsh(a)
    top = float(np.abs(w).max())
    if top == 0.0:
        raise ValueError("effective rank of the zero matrix is undefined")
    if w.min() < -PSD_TOL * top:
        raise ValueError(
            f"matrix is not positive semi-definite within tolerance "
            f"(min eigenvalue {w.min():.3e}, norm {top:.3e})"
        )
    return float(w.sum() / top)


def hadamard(a, b) -> np.ndarray:
    """Elementwise (term by term) product of two conforming matrices."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch for elementwise product: {a.shape} vs {b.shape}")
    return a * b


def outer(x, y) -> np.ndarray:
    """Rank-1 outer product x y^T of two vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("outer product expects 1-dimensional vectors")
    return np.outer(x, y)


def project_psd(a) -> np.ndarray:
    """Clamp negative eigenvalues to zero (optional post-processing step;
    the debiased estimators are not PSD-projected by default)."""
    w, v = eigh(a)
    w = np.maximum(w, 0.0)
    return symmetrize((v * w) @ v.T)
