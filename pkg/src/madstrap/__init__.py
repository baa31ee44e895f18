"""Bootstrap median and MAD: estimators, linear expansions, concentration
bounds, joint asymptotics and projection depth weighted means."""
from .asymptotics import NormalityReport, SigmaMatrix, joint_normality_check, sigma_matrix
from .bahadur import (
    BahadurDecomposition,
    ConcentrationBound,
    concentration_bound_mad,
    concentration_bound_median,
    decompose,
    mad_linear_term,
    med_linear_term,
)
from .bootstrap import BootstrapSample, ExactDistribution, ResamplePlan, enumerate_resamples, resample
from .depth import (
    DepthParams,
    PwmResult,
    WeightFunction,
    influence_f,
    influence_K,
    projection_depth,
    pwm_asym_variance,
    pwm_bootstrap,
    pwm_population,
    pwm_sample,
)
from .distributions import DistributionModel, RobustParams, draw_sample, make_model, quantile, robust_params
from .errors import (
    ConfigError,
    DegenerateError,
    DomainError,
    IntegrabilityError,
    MadstrapError,
    ModelUnsupportedError,
    SizeLimitError,
)
from .estimators import (
    SortedSample,
    abs_deviations,
    absdev_ecdf,
    ecdf,
    generalized_mad,
    generalized_median,
    modified_mad,
    order_stat,
    sample_mad,
    sample_median,
)
from .harness import ExperimentConfig, ResultSet, rate_fit, run_experiment, summarize

__version__ = "0.1.0"
