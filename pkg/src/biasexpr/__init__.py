"""Bias and entropic expressivity of black-box search algorithms."""

from .bias_metrics import (
    BiasExtrema,
    FamineReport,
    GeometricReport,
    HoeffdingResult,
    MCEstimate,
    applicable_targets_proportion,
    bias,
    bias_extrema,
    bias_of_strategy,
    conservation_sum,
    empirical_bias,
    famine_proportion,
    favorable_distributions_estimate,
    geometric_bound,
    hoeffding_bound,
    hoeffding_experiment,
    improbability_bound,
    improbability_estimate,
    mean_bias_over_distributions,
)
from .errors import (
    BiasExprError,
    ConfigError,
    DimensionMismatch,
    EmptySample,
    InvalidAlgorithmSpec,
    InvalidParameter,
    MissingStrategy,
    NegativeMass,
    NotNormalized,
    SchemaError,
    TooLarge,
)
from .expressivity import (
    ExpressivityRange,
    TradeoffBounds,
    entropic_expressivity,
    entropy_bits,
    expected_expressivity_bias_upper,
    expressivity_range,
    kl_to_uniform,
    max_entropy_construction,
    min_entropy_construction,
    table_of_ranges,
    tradeoff_bias_upper,
    tradeoff_expressivity_upper,
)
from .oracle import lemma2_check, min_mass_subset, sample_simplex
from .search import (
    AlgorithmSpec,
    ExplicitStrategy,
    FitnessTask,
    InformationResource,
    ResourceDistribution,
    ResourceSet,
    SearchSpace,
    SearchTrace,
    StrategyDistribution,
    TargetFunction,
    enumerate_targets,
    induced_strategy,
    load_resource_set,
    mix_strategies,
    per_query_success,
    run_search,
    uniform_strategy,
    validate_strategy,
)
from .verify import Figure2Row, VerificationReport, VerifyConfig, figure2_rows, verify_all

__version__ = "0.1.0"
