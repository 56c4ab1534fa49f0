"""Likelihood-ratio and largest-root tests for multivariate linear models.

Tests of the general linear hypothesis C B = 0 in Y = X B + E, with
calibrations that stay honest as the dimensions grow with the sample size,
plus a screening and multi-split procedure for designs with more predictors
than observations, and a Monte Carlo harness to audit all of it.
"""

from .distributions import (
    chi_sq_tail,
    chi_sq_upper_quantile,
    std_normal_tail,
    std_normal_upper_quantile,
    tw1_cdf,
    tw1_upper_quantile,
)
from .errors import (
    DataFormatError,
    DegenerateMatrixError,
    DegenerateRootError,
    DomainError,
    HypothesisRankError,
    MvlrtError,
    RegimeError,
    SingularDesignError,
    SplitInfeasibleError,
)
from .lrt import (
    BoundaryDiag,
    PowerSpec,
    TestReport,
    bartlett_rho,
    bartlett_test,
    boundary_check,
    chi2_test,
    mu_sigma,
    t1_test,
    t2_params,
    t2_test,
    t3_test,
    theoretical_power,
)
from .model import (
    DataSet,
    Dims,
    HypothesisMatrix,
    SignalMatrix,
    SumsOfSquares,
    canonical_form_sample,
    fit_mlr,
    hypothesis_ss,
    neg2_log_lrt,
    rel_eigenvalues,
    theta_max,
)
from .multisplit import (
    MultiSplitConfig,
    MultiSplitResult,
    SplitOutcome,
    adaptive_pt,
    multisplit_test,
    no_split_pvalue,
    per_split_pvalue,
    q_gamma,
    split_indices,
)
from .rng import derive_seed, stream
from .screening import (
    PcaReduction,
    ScreenResult,
    TransformRecord,
    canonical_corr,
    conditional_transform,
    parallel_analysis,
    pca_reduce,
    screen,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryDiag",
    "DataFormatError",
    "DataSet",
    "DegenerateMatrixError",
    "DegenerateRootError",
    "Dims",
    "DomainError",
    "HypothesisMatrix",
    "HypothesisRankError",
    "MultiSplitConfig",
    "MultiSplitResult",
    "MvlrtError",
    "PcaReduction",
    "PowerSpec",
    "RegimeError",
    "ScreenResult",
    "SignalMatrix",
    "SingularDesignError",
    "SplitInfeasibleError",
    "SplitOutcome",
    "SumsOfSquares",
    "TestReport",
    "TransformRecord",
    "adaptive_pt",
    "bartlett_rho",
    "bartlett_test",
    "boundary_check",
    "canonical_corr",
    "canonical_form_sample",
    "chi2_test",
    "chi_sq_tail",
    "chi_sq_upper_quantile",
    "conditional_transform",
    "derive_seed",
    "fit_mlr",
    "hypothesis_ss",
    "mu_sigma",
    "multisplit_test",
    "neg2_log_lrt",
    "no_split_pvalue",
    "parallel_analysis",
    "pca_reduce",
    "per_split_pvalue",
    "q_gamma",
    "rel_eigenvalues",
    "screen",
    "split_indices",
    "std_normal_tail",
    "std_normal_upper_quantile",
    "stream",
    "t1_test",
    "t2_params",
    "t2_test",
    "t3_test",
    "theoretical_power",
    "theta_max",
    "tw1_cdf",
    "tw1_upper_quantile",
]
