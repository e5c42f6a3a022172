"""Bayesian-optimization hyperparameter tuning for anomaly-detection classifiers."""

from .bayesopt import (
    Trial,
    TrialLog,
    bo_minimize,
    expected_improvement,
    propose_next,
    random_search,
)
from .data import (
    CategoricalMap,
    Column,
    Dataset,
    ScalingParams,
    Schema,
    apply_minmax,
    encode_categoricals,
    fit_categories,
    fit_minmax,
    load_csv,
    read_schema,
    stratified_split,
    synthesize_benchmark,
)
from .errors import BotuneError, ConfigError, DataError, NumericalError, SchemaError
from .experiment import (
    ExperimentConfig,
    RunSummary,
    emit_contour,
    emit_trace,
    load_config,
    run_experiment,
)
from .gp import (
    GpModel,
    KernelSpec,
    PosteriorMoments,
    fit_kernel_hyperparams,
    gp_fit,
    gp_posterior,
    kernel_eval,
)
from .metrics import ConfusionMatrix, MetricsReport, confusion, report
from .objective import ObjectiveSpec, default_space, evaluate_objective
from .space import Categorical, Continuous, Integer, SearchSpace

__version__ = "0.1.0"
