"""Synthetic data generation: low-effective-rank Gaussian samples,
MCAR/MAR missingness masks, and Dirac/Gaussian cell-wise contamination.

Every stochastic operation takes an explicit seed and is bitwise
reproducible; the project-wide generator is numpy's PCG64.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import (
    as_data_matrix,
    check_in_closed,
    check_in_open_closed,
    check_positive,
    check_positive_int,
    check_square_symmetric,
)
from .linalg import eigh, symmetrize

DIRAC = "dirac"
GAUSS = "gauss"
LAWS = (DIRAC, GAUSS)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class ContaminationModel:
    """Cell corruption model: a cell is observed clean with probability
    delta; an unobserved cell is filled with contamination noise with
    probability epsilon, otherwise it stays missing.

    law is 'dirac' (value +/- sigma with equal-probability sign),
    'gauss' (N(0, sigma^2)) or None (missingness only).
    """

    delta: float
    epsilon: float
    law: Optional[str] = None
    sigma: float = 1.0

    def __post_init__(self):
        check_in_open_closed(self.delta, 0.0, 1.0, "delta")
        check_in_closed(self.epsilon, 0.0, 1.0, "epsilon")
        if self.law is not None:
            if self.law not in LAWS:
                raise ValueError(f"law must be one of {LAWS} or None, got {self.law!r}")
            check_positive(self.sigma, "sigma")

    def noise_variance(self) -> float:
        """Per-cell second moment of the contamination noise (both laws
        are zero mean with variance sigma^2)."""
        if self.law is None:
            return 0.0
        return self.sigma**2


@dataclass
class MaskedData:
    """n x p observations with per-cell provenance masks.

    values carries NaN wherever a cell is missing. clean_mask marks
    cells observed uncorrupted; contam_mask marks cells filled with
    contamination noise. The two masks are disjoint and a cell is NaN
    iff neither mask is set.
    """

    values: np.ndarray
    clean_mask: np.ndarray
    contam_mask: np.ndarray

    def __post_init__(self):
        self.values = as_data_matrix(self.values, name="values")
        self.clean_mask = np.asarray(self.clean_mask, dtype=bool)
        self.contam_mask = np.asarray(self.contam_mask, dtype=bool)
        if self.clean_mask.shape != self.values.shape or self.contam_mask.shape != self.values.shape:
            raise ValueError("mask shapes must match values")
        if (self.clean_mask & self.contam_mask).any():
            raise ValueError("clean_mask and contam_mask must be disjoint")
        observed = ~np.isnan(self.values)
        if not (observed == (self.clean_mask | self.contam_mask)).all():
            raise ValueError("a cell must be NaN iff neither mask is set")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def observed_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @classmethod
    def from_values(cls, values) -> "MaskedData":
        """Wrap a raw array with NaN sentinels; all observed cells are
        presumed clean (no contamination ground truth)."""
        values = as_data_matrix(values, name="values")
        observed = ~np.isnan(values)
        return cls(values, observed, np.zeros_like(observed))

    def without_cells(self, flags) -> "MaskedData":
        """Return a copy with the flagged cells removed (set to the
        missing sentinel, masks cleared)."""
        flags = np.asarray(flags, dtype=bool)
        if flags.shape != self.values.shape:
            raise ValueError("flags shape must match values")
        values = self.values.copy()
        values[flags] = np.nan
        return MaskedData(values, self.clean_mask & ~flags, self.contam_mask & ~flags)


@dataclass(frozen=True)
class GroundTruth:
    """The generating covariance and the uncorrupted sample matrix."""

    sigma_true: np.ndarray
    samples_clean: np.ndarray = field(repr=False)


def make_covariance(p: int, r: float, seed) -> np.ndarray:
    """Random covariance with requested effective rank r < p.

    Eigenvalues lambda_j = exp(-j / r) in a Haar-random orthonormal
    basis, rescaled so the largest diagonal entry equals 1. The true
    effective rank lands below r + 1 for r << p.
    """
    p = check_positive_int(p, "p")
    r = check_positive(r, "r")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if r >= p:
        raise ValueError(f"requested effective rank r={r} must be < p={p}")
    rng = _rng(seed)
    # Haar orthogonal matrix: QR of an i.i.d. Gaussian matrix with the
    # R-diagonal sign correction.
    g = rng.standard_normal((p, p))
    q, rr = np.linalg.qr(g)
    q = q * np.sign(np.diag(rr))
    lam = np.exp(-np.arange(1, p + 1) / r)
    sigma = symmetrize((q * lam) @ q.T)
    sigma /= np.diag(sigma).max()
    return sigma


def sample_gaussian(sigma, n: int, seed) -> np.ndarray:
    """n i.i.d. rows from N(0, sigma) via the symmetric square root of
    sigma (negative eigenvalues clamped to zero)."""
    sigma = check_square_symmetric(sigma, name="sigma")
    n = check_positive_int(n, "n")
    w, v = eigh(sigma)
    root = symmetrize((v * np.sqrt(np.maximum(w, 0.0))) @ v.T)
    g = _rng(seed).standard_normal((n, sigma.shape[0]))
    return g @ root


def apply_mcar(x, delta: float, seed) -> MaskedData:
    """Keep each cell independently with probability delta; dropped
    cells become the missing sentinel."""
    x = as_data_matrix(x, allow_nan=False, name="x")
    delta = check_in_open_closed(delta, 0.0, 1.0, "delta")
    keep = _rng(seed).random(x.shape) < delta
    values = np.where(keep, x, np.nan)
    return MaskedData(values, keep, np.zeros_like(keep))


def _sigmoid(t):
    return 1.0 / (1.0 + np.exp(-t))


MAR_PILOT_ROWS = 15


def apply_mar(x, seed) -> tuple[MaskedData, np.ndarray]:
    """Feature-dependent missingness: column j is kept with probability
    delta_j = 1 - sigmoid(mean of its first 15 entries).

    Returns the masked data and the delta vector used. The pilot means
    are taken on raw values.
    """
    x = as_data_matrix(x, allow_nan=False, name="x")
    if x.shape[0] < MAR_PILOT_ROWS:
        raise ValueError(f"apply_mar needs n >= {MAR_PILOT_ROWS} rows, got {x.shape[0]}")
    delta_vec = 1.0 - _sigmoid(x[:MAR_PILOT_ROWS].mean(axis=0))
    keep = _rng(seed).random(x.shape) < delta_vec[None, :]
    values = np.where(keep, x, np.nan)
    return MaskedData(values, keep, np.zeros_like(keep)), delta_vec


def contaminate(md: MaskedData, model: ContaminationModel, seed) -> MaskedData:
    """Fill each missing cell independently, with probability
    model.epsilon, with a draw from the contamination law; record those
    cells in contam_mask. Remaining missing cells stay sentinel."""
    if model.law is None:
        raise ValueError("contaminate requires a contamination law (model.law is None)")
    rng = _rng(seed)
    # Draw full-shape arrays so the stream is independent of the mask layout.
    hit = rng.random(md.values.shape) < model.epsilon
    if model.law == DIRAC:
        noise = model.sigma * np.where(rng.random(md.values.shape) < 0.5, -1.0, 1.0)
    else:
        noise = rng.normal(0.0, model.sigma, size=md.values.shape)
    missing = ~(md.clean_mask | md.contam_mask)
    fill = missing & hit
    values = md.values.copy()
    values[fill] = noise[fill]
    return MaskedData(values, md.clean_mask, md.contam_mask | fill)


def simulate(
    n: int,
    p: int,
    r: float,
    model: ContaminationModel,
    seed,
) -> tuple[MaskedData, GroundTruth]:
    """Full generation pipeline: covariance, Gaussian sample, MCAR mask,
    optional contamination. Sub-seeds are derived deterministically."""
    ss = np.random.SeedSequence([_entropy(seed), 0])
    s_cov, s_sample, s_mask, s_fill = ss.generate_state(4)
    sigma = make_covariance(p, r, int(s_cov))
    x = sample_gaussian(sigma, n, int(s_sample))
    md = apply_mcar(x, model.delta, int(s_mask))
    if model.law is not None and model.epsilon > 0:
        md = contaminate(md, model, int(s_fill))
    return md, GroundTruth(sigma, x)


def _entropy(seed) -> int:
    """Map any integer seed onto the non-negative range SeedSequence accepts."""
    return int(seed) & 0xFFFFFFFFFFFFFFFF
