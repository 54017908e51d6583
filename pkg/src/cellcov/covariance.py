"""Scikit-learn style estimator front end.

All estimators accept an (n_samples, n_features) array in which NaN
marks a missing cell, expose the fitted matrix as ``covariance_`` and
compose with the usual ``get_params``/``set_params`` machinery. The
data is treated as zero mean unless ``center=True``.
"""

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_data_matrix
from .datagen import MaskedData
from .debias import center_observed
from .detect import ddc_masks, tail_cut
from .linalg import effective_rank, project_psd
from .pipelines import PipelineSpec, run_pipeline


class _CovarianceMixin:
    """Shared fit plumbing for the pipeline-backed estimators."""

    def _spec(self) -> PipelineSpec:
        raise NotImplementedError

    def fit(self, X, y=None):
        X = as_data_matrix(X)
        if getattr(self, "center", False):
            X = center_observed(X)
        md = MaskedData.from_values(X)
        sigma, report = run_pipeline(self._spec(), md)
        if getattr(self, "psd_clip", False):
            sigma = project_psd(sigma)
        self.covariance_ = sigma
        self.flags_ = None if report is None else report.flags
        self.n_features_in_ = X.shape[1]
        return self

    @property
    def effective_rank_(self) -> float:
        return effective_rank(project_psd(self.covariance_))


class ClassicalCovariance(_CovarianceMixin, BaseEstimator):
    """Zero-filled empirical second moment, no correction. The baseline
    every robust pipeline should beat under contamination."""

    def __init__(self, center=False, psd_clip=False):
        self.center = center
        self.psd_clip = psd_clip

    def _spec(self):
        return PipelineSpec("classical")


class DebiasedCovariance(BaseEstimator):
    """Missing-value debiased covariance (no outlier filtering).

    With ``per_feature=False`` the homogeneous correction with a single
    observation rate is applied; otherwise each feature uses its own
    estimated rate.
    """

    def __init__(self, per_feature=True, center=False, psd_clip=False):
        self.per_feature = per_feature
        self.center = center
        self.psd_clip = psd_clip

    def fit(self, X, y=None):
        from .debias import debias_mar, debias_mcar, empirical_cov_zero_fill

        X = as_data_matrix(X)
        if self.center:
            X = center_observed(X)
        md = MaskedData.from_values(X)
        oc = empirical_cov_zero_fill(md)
        if self.per_feature:
            sigma = debias_mar(oc.sigma_y, oc.delta_hat_features)
        else:
            sigma = debias_mcar(oc.sigma_y, oc.delta_hat)
        if self.psd_clip:
            sigma = project_psd(sigma)
        self.covariance_ = sigma
        self.delta_ = oc.delta_hat
        self.delta_per_feature_ = oc.delta_hat_features
        self.n_features_in_ = X.shape[1]
        return self


class TailCutCovariance(_CovarianceMixin, BaseEstimator):
    """Tail filter followed by the per-feature debiasing correction."""

    def __init__(self, tail_k=3.0, center=False, psd_clip=False):
        self.tail_k = tail_k
        self.center = center
        self.psd_clip = psd_clip

    def _spec(self):
        return PipelineSpec("tail_mv", tail_k=self.tail_k)


class DDCCovariance(_CovarianceMixin, BaseEstimator):
    """Deviating-cells filter followed by the per-feature debiasing
    correction."""

    def __init__(self, quantile=0.99, center=False, psd_clip=False):
        self.quantile = quantile
        self.center = center
        self.psd_clip = psd_clip

    def _spec(self):
        return PipelineSpec("ddc_mv", quantile=self.quantile)


class DDCKNNCovariance(_CovarianceMixin, BaseEstimator):
    """Deviating-cells filter, k-nearest-neighbor imputation, then the
    plain empirical second moment on the completed data."""

    def __init__(self, quantile=0.99, n_neighbors=5, center=False, psd_clip=False):
        self.quantile = quantile
        self.n_neighbors = n_neighbors
        self.center = center
        self.psd_clip = psd_clip

    def _spec(self):
        return PipelineSpec("ddc_knn", quantile=self.quantile, k_neighbors=self.n_neighbors)


class TailCutDetector(BaseEstimator):
    """Per-cell outlier detector using the univariate tail filter.

    ``fit_predict`` returns the boolean flag mask (True = outlying cell).
    """

    def __init__(self, tail_k=3.0):
        self.tail_k = tail_k

    def fit(self, X, y=None):
        X = as_data_matrix(X)
        report = tail_cut(MaskedData.from_values(X), self.tail_k)
        self.flags_ = report.flags
        self.n_features_in_ = X.shape[1]
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).flags_


class DeviatingCellDetector(BaseEstimator):
    """Per-cell outlier detector using the 7-step deviating-cells
    procedure; exposes the univariate and residual stages separately."""

    def __init__(self, quantile=0.99):
        self.quantile = quantile

    def fit(self, X, y=None):
        X = as_data_matrix(X)
        step2, step7 = ddc_masks(MaskedData.from_values(X), self.quantile)
        self.univariate_flags_ = step2
        self.residual_flags_ = step7
        self.flags_ = step2 | step7
        self.n_features_in_ = X.shape[1]
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).flags_
