"""Log-densities of CGF-specified distributions via saddlepoint-adjusted inversion."""

from .cgf import CgfModel, DomainInterval, TiltedModel, char_fn, standardized_tilted_cf, tilt
from .errors import (
    ConvergenceError,
    DomainError,
    InversionError,
    ParseError,
    QuadratureError,
    SpinvError,
    UnattainableMeanError,
    ValidationError,
)
from .estimation import (
    FitResult,
    GbmParams,
    ParamTransform,
    ProfilePoint,
    ReturnSeries,
    fit_mle,
    hessian_std_errors,
    kl_asymptotic_estimator,
    moment_init,
    negative_log_likelihood,
    profile_nll,
    transform_for,
)
from .bessel import bessel_k1_scaled
from .inversion import (
    DEFAULT_DIRECT_QUAD,
    LogDensityResult,
    QuadratureSpec,
    default_spi_quad,
    direct_ift_log_density,
    direct_ift_log_density_batch,
    p_bar_zero,
    simpson_integrate,
    spa_log_density,
    spa_log_density_batch,
    spi_log_density,
    spi_log_density_batch,
)
from .models import (
    Gaussian,
    GaussianParams,
    MjdParams,
    MjdTransition,
    Nig,
    NigParams,
    gaussian_log_density,
    mjd_truncated_log_density,
    nig_exact_log_density,
    nig_moments,
    simulate_mjd_path,
    simulate_nig,
)
from .saddlepoint import SaddlepointSolution, solve_saddlepoint, solve_saddlepoint_batch

__version__ = "0.1.0"
