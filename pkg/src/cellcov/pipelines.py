"""End-to-end covariance pipelines combining detection, cell removal,
imputation and debiasing.

Five pipeline kinds are supported:

* classical: zero-filled empirical covariance, no correction at all.
* oracle_mv: removes exactly the ground-truth contaminated cells, then
  applies the homogeneous debiasing correction (performance ceiling).
* tail_mv:  tail_cut filter, then per-feature debiasing.
* ddc_mv:   deviating-cells filter, then per-feature debiasing.
* ddc_knn:  deviating-cells filter, k-nearest-neighbor imputation, then
  the plain empirical second moment on the completed data.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.impute import KNNImputer

from .datagen import GroundTruth, MaskedData
from .debias import debias_mar, debias_mcar, empirical_cov_zero_fill, estimate_delta
from .detect import FilterReport, ddc, score_filter, tail_cut

CLASSICAL = "classical"
ORACLE_MV = "oracle_mv"
TAIL_MV = "tail_mv"
DDC_MV = "ddc_mv"
DDC_KNN = "ddc_knn"
PIPELINE_KINDS = (CLASSICAL, ORACLE_MV, TAIL_MV, DDC_MV, DDC_KNN)


class ImputationError(ValueError):
    """Raised when imputation is impossible (fully missing column)."""


@dataclass(frozen=True)
class PipelineSpec:
    """Which pipeline to run and its knobs; quantile applies to the ddc
    variants, k_neighbors to ddc_knn, tail_k to tail_mv."""

    kind: str
    quantile: float = 0.99
    k_neighbors: int = 5
    tail_k: float = 3.0

    def __post_init__(self):
        if self.kind not in PIPELINE_KINDS:
            raise ValueError(f"unknown pipeline kind {self.kind!r}; expected one of {PIPELINE_KINDS}")
        if self.kind in (DDC_MV, DDC_KNN) and not 0.0 < self.quantile < 1.0:
            raise ValueError(f"quantile must lie in (0, 1), got {self.quantile}")
        if self.kind == DDC_KNN and self.k_neighbors < 1:
            raise ValueError(f"k_neighbors must be positive, got {self.k_neighbors}")
        if self.kind == TAIL_MV and self.tail_k <= 0:
            raise ValueError(f"tail_k must be positive, got {self.tail_k}")

    @property
    def label(self) -> str:
        """Stable identifier used in benchmark records."""
        if self.kind in (DDC_MV, DDC_KNN):
            return f"{self.kind}{round(self.quantile * 100):02d}"
        return self.kind


def knn_impute(md: MaskedData, k: int = 5) -> np.ndarray:
    """Complete the data by k-nearest-neighbor imputation.

    Row distances are Euclidean over co-observed coordinates rescaled by
    sqrt(p / #co-observed); a missing cell takes the mean of its feature
    over the k nearest rows observing it, falling back to the column
    mean when no donor row exists.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    counts = md.observed_mask.sum(axis=0)
    if (counts == 0).any():
        j = int(np.flatnonzero(counts == 0)[0])
        raise ImputationError(f"column {j} has no observed values; imputation impossible")
    if not np.isnan(md.values).any():
        return md.values.copy()
    imputer = KNNImputer(n_neighbors=k, weights="uniform")
    return imputer.fit_transform(md.values)


def _post_filter_debias(md: MaskedData, flags: np.ndarray) -> np.ndarray:
    """Remove flagged cells and apply the per-feature correction
    (filtering removes different fractions per column, so the
    heterogeneous formula is the right one even under uniform truth)."""
    filtered = md.without_cells(flags)
    oc = empirical_cov_zero_fill(filtered)
    return debias_mar(oc.sigma_y, oc.delta_hat_features)


def run_pipeline(
    spec: PipelineSpec,
    md: MaskedData,
    truth: Optional[GroundTruth] = None,
) -> tuple[np.ndarray, Optional[FilterReport]]:
    """Run one pipeline on masked data.

    Returns the covariance estimate and, for the filtering pipelines, a
    FilterReport whose delta_hat/eps_hat accounting is filled in only
    when ground truth was supplied.
    """
    if spec.kind == CLASSICAL:
        return empirical_cov_zero_fill(md).sigma_y, None

    if spec.kind == ORACLE_MV:
        if truth is None:
            raise ValueError("the oracle pipeline requires ground truth")
        report = FilterReport(md.contam_mask.copy())
        filtered = md.without_cells(report.flags)
        oc = empirical_cov_zero_fill(filtered)
        sigma_hat = debias_mcar(oc.sigma_y, oc.delta_hat)
    elif spec.kind == TAIL_MV:
        report = tail_cut(md, spec.tail_k)
        sigma_hat = _post_filter_debias(md, report.flags)
    elif spec.kind == DDC_MV:
        report = ddc(md, spec.quantile)
        sigma_hat = _post_filter_debias(md, report.flags)
    else:  # DDC_KNN
        report = ddc(md, spec.quantile)
        completed = knn_impute(md.without_cells(report.flags), spec.k_neighbors)
        n = completed.shape[0]
        sigma_hat = (completed.T @ completed) / n
        sigma_hat = (sigma_hat + sigma_hat.T) / 2.0

    if truth is not None:
        report.delta_hat, report.eps_hat = score_filter(report, md)
    return sigma_hat, report
