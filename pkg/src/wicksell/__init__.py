"""Sphere-size distributions from planar profile measurements."""

from .distributions import FAMILIES, SizeDistribution
from .errors import DataError, NumericalError, ParameterError, WicksellError
from .estimators import (
    FitOptions,
    FitResult,
    ProfileSample,
    cvm_distance,
    effective_diameters,
    fit,
    fit_mde,
    fit_mle,
    fit_mle_censored,
    fit_mle_weighted,
    fit_mom,
    fit_mom_from_moments,
    log_likelihood,
)
from .inference import (
    ConfidenceRegion,
    aic_compare,
    bootstrap_estimate,
    critical_value,
    likelihood_ratio_region,
    scalar_range,
    simulate_critical_quantiles,
)
from .profile_density import (
    DEFAULT_M,
    PolygonApproximation,
    approx_profile_pdf,
    build_approximation,
    exact_profile_pdf,
    intermediate_profile_pdf,
    profile_cdf,
    profile_mean,
    weighted_profile_pdf,
)
from .simulation import (
    BenchmarkSpec,
    run_benchmark,
    simulate_bounded_section,
    simulate_profiles,
)
from .sklearn_api import WicksellSizeEstimator

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "SizeDistribution",
    "WicksellError",
    "ParameterError",
    "DataError",
    "NumericalError",
    "ProfileSample",
    "FitResult",
    "FitOptions",
    "effective_diameters",
    "log_likelihood",
    "fit",
    "fit_mle",
    "fit_mle_censored",
    "fit_mle_weighted",
    "fit_mom",
    "fit_mom_from_moments",
    "fit_mde",
    "cvm_distance",
    "PolygonApproximation",
    "build_approximation",
    "approx_profile_pdf",
    "intermediate_profile_pdf",
    "exact_profile_pdf",
    "profile_cdf",
    "profile_mean",
    "weighted_profile_pdf",
    "DEFAULT_M",
    "ConfidenceRegion",
    "critical_value",
    "simulate_critical_quantiles",
    "likelihood_ratio_region",
    "scalar_range",
    "bootstrap_estimate",
    "aic_compare",
    "BenchmarkSpec",
    "run_benchmark",
    "simulate_profiles",
    "simulate_bounded_section",
    "WicksellSizeEstimator",
]
