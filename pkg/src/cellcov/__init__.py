"""cellcov: covariance estimation under missing values and cell-wise
outliers.

The package combines per-cell outlier filtering (a univariate tail
filter and the 7-step deviating-cells procedure) with closed-form
debiasing of the zero-filled empirical covariance, plus a Monte Carlo
benchmark harness and a CSV-based command line interface.
"""

from .bench import (
    BenchRecord,
    ExperimentGrid,
    relative_spectral_difference,
    run_grid,
    summarize,
)
from .covariance import (
    ClassicalCovariance,
    DDCCovariance,
    DDCKNNCovariance,
    DebiasedCovariance,
    DeviatingCellDetector,
    TailCutCovariance,
    TailCutDetector,
)
from .datagen import (
    ContaminationModel,
    GroundTruth,
    MaskedData,
    apply_mar,
    apply_mcar,
    contaminate,
    make_covariance,
    sample_gaussian,
)
from .debias import (
    ObservedCovariance,
    debias_contaminated,
    debias_mar,
    debias_mcar,
    empirical_cov_zero_fill,
    estimate_delta,
)
from .detect import (
    FilterReport,
    RobustScale,
    chi2_1_quantile,
    ddc,
    ddc_masks,
    mad_location_scale,
    robust_location_scale,
    score_filter,
    tail_cut,
)
from .linalg import (
    Spectrum,
    effective_rank,
    eigh,
    frobenius_norm,
    hadamard,
    operator_norm,
    outer,
    project_psd,
)
from .pipelines import PipelineSpec, knn_impute, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "BenchRecord",
    "ClassicalCovariance",
    "ContaminationModel",
    "DDCCovariance",
    "DDCKNNCovariance",
    "DebiasedCovariance",
    "DeviatingCellDetector",
    "ExperimentGrid",
    "FilterReport",
    "GroundTruth",
    "MaskedData",
    "ObservedCovariance",
    "PipelineSpec",
    "RobustScale",
    "Spectrum",
    "TailCutCovariance",
    "TailCutDetector",
    "apply_mar",
    "apply_mcar",
    "chi2_1_quantile",
    "contaminate",
    "ddc",
    "ddc_masks",
    "debias_contaminated",
    "debias_mar",
    "debias_mcar",
    "effective_rank",
    "eigh",
    "empirical_cov_zero_fill",
    "estimate_delta",
    "frobenius_norm",
    "hadamard",
    "knn_impute",
    "mad_location_scale",
    "make_covariance",
    "operator_norm",
    "outer",
    "project_psd",
    "relative_spectral_difference",
    "robust_location_scale",
    "run_grid",
    "run_pipeline",
    "sample_gaussian",
    "score_filter",
    "summarize",
    "tail_cut",
]
