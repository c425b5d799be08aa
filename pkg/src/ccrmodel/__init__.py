"""Sparse low-rank estimation of differences between group-conditional
cross-covariance matrices.

Typical use::

    from ccrmodel import GroupedDataset, CcrConfig, center_within_group, phi_tilde, fit

    d = center_within_group(GroupedDataset(x, y, labels))
    res = fit(phi_tilde(d), CcrConfig(rank=1, s1=3, s2=3))
"""

__version__ = "0.1.0"

from .data import CrossCovDifference, GroupedDataset, center_within_group, group_cross_covariance, phi_tilde
from .errors import (
    CcrError,
    ConvergenceError,
    DegenerateBasisError,
    DimensionError,
    NotPSDError,
    ScenarioError,
    StateError,
    UndefinedCorrelationError,
    ValidationError,
)
from .estimator import CcrConfig, CcrFit, correlation_differences, covariance_differences, fit
from .linalg import projector, psd_sqrt, qr_orthonormalize, subspace_distance, truncated_svd
from .multigroup import StackedPhi, build_stacked_phi, fit_multigroup, group_score_correlations
from .selection import (
    IcSurface,
    SpssConfig,
    SpssResult,
    exact_sign_flip_pvalue,
    ic_surface,
    lto_delta_samples,
    sign_flip_pvalue,
    spss_select,
)
from .simulation import (
    PRESETS,
    EvalReport,
    SimScenario,
    build_population,
    evaluate,
    resampling_ratios,
    run_replications,
    sample_dataset,
    sparsity_sweep,
)

__all__ = [
    "CcrConfig", "CcrFit", "CcrError", "ConvergenceError", "CrossCovDifference", "DegenerateBasisError",
    "DimensionError", "EvalReport", "GroupedDataset", "IcSurface", "NotPSDError", "PRESETS", "ScenarioError",
    "SimScenario", "SpssConfig", "SpssResult", "StackedPhi", "StateError", "UndefinedCorrelationError",
    "ValidationError", "build_population", "build_stacked_phi", "center_within_group", "correlation_differences",
    "covariance_differences", "evaluate", "exact_sign_flip_pvalue", "fit", "fit_multigroup",
    "group_cross_covariance", "group_score_correlations", "ic_surface", "lto_delta_samples", "phi_tilde",
    "projector", "psd_sqrt", "qr_orthonormalize", "resampling_ratios", "run_replications", "sample_dataset",
    "sign_flip_pvalue", "sparsity_sweep", "spss_select", "subspace_distance", "truncated_svd",
]
