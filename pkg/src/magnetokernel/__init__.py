"""Feynman-Kac heat kernels and Green functions in random Gaussian magnetic fields."""

__version__ = "0.1.0"

from ._validation import ConfigurationError
from .bounds import (
    BoundConstants,
    BoundFitError,
    BoundReport,
    CollapseReport,
    LowerBoundFitter,
    NonConfiningError,
    corollary4_bounds,
    green_bounds,
    jensen_lower_bound,
    scaling_collapse,
    theorem2_bounds,
    theorem3_lower_bound,
    theorem3_upper_bound,
)
from .estimator import (
    BoxTooSmallError,
    DivergenceError,
    EstimatorError,
    FeynmanKacKernel,
    GreenEstimate,
    KernelEstimate,
    PathExitError,
    QuadratureError,
    TraceEstimate,
    green_diagonal_difference,
    green_estimate,
    kernel_fixed_field,
    kernel_gaussian_average,
    kernel_quenched_average,
    trace_estimate,
)
from .exact import free_green, free_kernel, harmonic_trace, landau_kernel, mehler_kernel
from .fields import (
    BoundedIsotropic,
    CovarianceError,
    FieldExtentError,
    FieldGrid,
    FieldSample,
    GaugeFunction,
    ScaleInvariant,
    TranslationInvariant,
    gauge_transform,
    grid_for,
    load_field,
    project_transverse,
    sample_field,
    save_field,
    to_transverse,
)
from .paths import BridgePath, PhysParams, SpacePath, TimeGrid, make_space_path, sample_bridge, sample_brownian
from .potentials import Constant, Custom, PotentialError, PowerLaw, Quadratic, Saturating, Zero
from .stochint import FieldEvaluationError, ito_integral, line_integrals, stratonovich_integral, variance_decomposition

__all__ = [name for name in dir() if not name.startswith("_")]
