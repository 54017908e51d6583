"""Empirical covariance on masked data and the closed-form debiasing
corrections for homogeneous (MCAR), heterogeneous (MAR) and
contamination-aware settings.

The data is assumed zero mean; no mean is subtracted here. The CLI
offers optional pre-centering on observed cells for real data.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_in_closed, check_square_symmetric, symmetrize
from .datagen import MaskedData


@dataclass(frozen=True)
class ObservedCovariance:
    """Second moment of the zero-filled observations together with the
    estimated observation rates."""

    sigma_y: np.ndarray
    delta_hat: float
    delta_hat_features: np.ndarray
    n_used: int


def estimate_delta(md: MaskedData) -> tuple[float, np.ndarray]:
    """Observed-cell fractions, global and per feature.

    Both are clamped to at least 1/n so downstream corrections never
    divide by zero; a fully empty column additionally emits a warning.
    """
    observed = md.observed_mask
    n = md.n
    counts = observed.sum(axis=0)
    if (counts == 0).any():
        empty = np.flatnonzero(counts == 0)
        warnings.warn(
            f"column(s) {empty.tolist()} have no observed values; "
            f"their observation rate is clamped to 1/n",
            RuntimeWarning,
            stacklevel=2,
        )
    floor = 1.0 / n
    per_feature = np.maximum(counts / n, floor)
    global_rate = max(observed.mean(), floor)
    return float(global_rate), per_feature


def empirical_cov_zero_fill(md: MaskedData) -> ObservedCovariance:
    """(1/n) sum of y_i y_i^T with missing sentinels treated as exact
    zeros. No mean subtraction."""
    if md.n < 2:
        raise ValueError(f"need at least 2 samples, got {md.n}")
    y = np.where(md.observed_mask, md.values, 0.0)
    sigma_y = symmetrize(y.T @ y / md.n)
    global_rate, per_feature = estimate_delta(md)
    return ObservedCovariance(sigma_y, global_rate, per_feature, md.n)


def debias_mcar(sigma_y, delta: float) -> np.ndarray:
    """Undo the multiplicative bias of uniform missingness:

        sigma_hat = delta^-2 sigma_y + (delta^-1 - delta^-2) diag(sigma_y)

    Equals sigma_y when delta is 1.
    """
    sigma_y = check_square_symmetric(sigma_y, name="sigma_y")
    delta = check_in_closed(delta, 0.0, 1.0, "delta")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    inv = 1.0 / delta
    out = inv**2 * sigma_y
    d = np.diag_indices_from(out)
    out[d] = inv * sigma_y[d]
    return symmetrize(out)


def debias_mar(sigma_y, delta_vec) -> np.ndarray:
    """Heterogeneous-missingness correction with per-feature observation
    rates delta_j:

        sigma_hat = D_inv (.) sigma_y + (diag(d_inv) - D_inv) (.) diag(sigma_y)

    where d_inv = (1/delta_j) and D_inv = d_inv d_inv^T. Reduces to the
    MCAR correction when all rates are equal.
    """
    sigma_y = check_square_symmetric(sigma_y, name="sigma_y")
    delta_vec = np.asarray(delta_vec, dtype=np.float64).ravel()
    if delta_vec.shape[0] != sigma_y.shape[0]:
        raise ValueError("delta_vec length must match the matrix dimension")
    if (delta_vec <= 0).any() or (delta_vec > 1).any():
        raise ValueError("every delta_j must lie in (0, 1]")
    d_inv = 1.0 / delta_vec
    out = np.outer(d_inv, d_inv) * sigma_y
    d = np.diag_indices_from(out)
    out[d] = d_inv * sigma_y[d]
    return symmetrize(out)


def debias_contaminated(sigma_y, delta: float, epsilon: float, lambda_diag) -> np.ndarray:
    """Contamination-aware correction for noise with known diagonal
    second moment Lambda:

        sigma_hat = (delta^-1 - delta^-2) diag(sigma_y) + delta^-2 sigma_y
                    - (epsilon (1 - delta) / delta) diag(lambda_diag)

    The noise term is subtracted, as forced by the componentwise
    identity sigma_jj = delta^-1 (sigma_y_jj - eps (1-delta) lambda_jj).
    With lambda_diag = 0 this reduces exactly to the MCAR correction.
    """
    sigma_y = check_square_symmetric(sigma_y, name="sigma_y")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    epsilon = check_in_closed(epsilon, 0.0, 1.0, "epsilon")
    lambda_diag = np.asarray(lambda_diag, dtype=np.float64).ravel()
    if lambda_diag.shape[0] != sigma_y.shape[0]:
        raise ValueError("lambda_diag length must match the matrix dimension")
    if (lambda_diag < 0).any():
        raise ValueError("lambda_diag must be nonnegative")
    out = debias_mcar(sigma_y, delta)
    d = np.diag_indices_from(out)
    out[d] -= epsilon * (1.0 - delta) / delta * lambda_diag
    return symmetrize(out)


def center_observed(values) -> np.ndarray:
    """Subtract per-feature means computed over observed cells only
    (optional pre-centering for real data)."""
    values = np.asarray(values, dtype=np.float64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns
        means = np.nanmean(values, axis=0)
    means = np.where(np.isnan(means), 0.0, means)
    return values - means[None, :]
