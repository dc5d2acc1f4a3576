"""Long-range dependent functional time series in a fixed basis.

Spectral models, Gaussian simulation, periodogram statistics and
minimum-contrast estimation of the long-memory parameter.
"""

from .errors import (ConfigError, EmbeddingError, FlrdError, ModelValidationError, NumericalConsistencyError,
                     OptimizationError, QuadratureError, SingularityError, ValidationError)
from .estimation import (ContrastSurface, Normalizer, OptimizerConfig, WeightSymbol, divergence, empirical_contrast,
                         estimate_theta, log_weight_symbol, normalizer, theoretical_contrast, upsilon_symbol)
from .models import (FarimaRational, LongMemorySymbol, SpectralModel, TaperedRational, autocovariances,
                     covariance_symbol, fractional_noise_model, load_model, lrd_asymptote, model_from_config,
                     spectral_density_symbol, validate_assumptions)
from .operators import BasisSpec, DiagonalOperator, FrequencyGrid, HermitianFrame, fourier_grid, quadrature_grid
from .simulation import SamplePath, SimConfig, empirical_covariance, simulate_gaussian
from .spectral import expected_periodogram, fdft, fejer, integrated_bias, periodogram

__all__ = [
    "ConfigError", "EmbeddingError", "FlrdError", "ModelValidationError", "NumericalConsistencyError",
    "OptimizationError", "QuadratureError", "SingularityError", "ValidationError", "ContrastSurface", "Normalizer",
    "OptimizerConfig", "WeightSymbol", "divergence", "empirical_contrast", "estimate_theta", "log_weight_symbol",
    "normalizer", "theoretical_contrast", "upsilon_symbol", "FarimaRational", "LongMemorySymbol", "SpectralModel",
    "TaperedRational", "autocovariances", "covariance_symbol", "fractional_noise_model", "load_model",
    "lrd_asymptote", "model_from_config", "spectral_density_symbol", "validate_assumptions", "BasisSpec",
    "DiagonalOperator", "FrequencyGrid", "HermitianFrame", "fourier_grid", "quadrature_grid", "SamplePath",
    "SimConfig", "empirical_covariance", "simulate_gaussian", "expected_periodogram", "fdft", "fejer",
    "integrated_bias", "periodogram"
]

__version__ = "0.1.0"
