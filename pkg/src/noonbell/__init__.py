"""Hybrid CHSH tests with weakly amplified two-photon N00N states."""
from .channels import (
    LossParams,
    ProductFormDensity,
    TwoModeDensity,
    amplitude_damp,
    binomial_pmf,
    damp_product_form,
    damp_then_amplify,
    loss_for_measurement,
)
from .chsh import (
    BellResult,
    BoundaryCurve,
    NoViolationError,
    SweepSeries,
    bell_value,
    min_detector_efficiency,
    min_transmittance,
    optimize_gain,
    optimize_thresholds,
    sweep_gain,
    violation_boundary,
)
from .estimators import BellOptimizer, ViolationBoundary
from .fockspace import (
    Gain,
    InsufficientCutoffError,
    amplified_noon,
    mean_total_photons,
    squeeze_matrix,
    squeezed_two_photon_coeffs,
    squeezed_vacuum_coeffs,
)
from .measurement import QTable, Thresholds, corr_nn, corr_nx, corr_xn, corr_xx, q_overlap, q_table

__version__ = "0.1.0"
