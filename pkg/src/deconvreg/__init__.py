"""Deconvolution regression on the circle with bootstrap regularization selection."""

from .bootstrap import (
    BootstrapConfig,
    Contaminant,
    SelectionGrid,
    SmoothErrorDistribution,
    bootstrap_imse,
    bootstrap_imse_curve,
    center_residuals,
    sample_smooth_errors,
    select_g_opt,
    silverman_cn,
    smooth_cdf,
    smooth_density,
)
from .ecdf import Ecdf, ErrorModel, asymptotic_aimse, asymptotic_covariance, residual_ecdf
from .errors import (
    DeconvError,
    DegenerateDistributionError,
    FrequencyOverflowError,
    InputValidationError,
    IntegrationError,
    NonInvertibleDistortionError,
    NumericalError,
    ShapeMismatchError,
    SymmetryViolationError,
)
from .estimator import (
    RegularizedEstimate,
    ResidualSet,
    deconvolution_kernel,
    estimate_theta,
    fitted_values,
    integrated_variance_formula,
    ise,
    pilot_h,
    residuals,
    rule_of_thumb_h,
)
from .kernel import (
    AssumptionProfile,
    SmoothingKernelSpec,
    ValidationReport,
    lambda_eval,
    validate_assumption,
)
from .riskhull import RiskHullConfig, select_cutoff_risk_hull, spectral_cutoff_estimate
from .sim import (
    ExperimentConfig,
    ResultTable,
    SignalSpec,
    bootstrap_covariance_check,
    generate_sample,
    oracle_ise_select,
    run_experiment,
    signal_eval,
)
from .spectral import (
    DesignGrid,
    DistortionSpec,
    Sample,
    SpectralCoefficients,
    apply_convolution,
    distortion_coefficients,
    empirical_fourier_coefficients,
    evaluate_series,
    parseval_l2_distance,
)

__version__ = "0.1.0"
