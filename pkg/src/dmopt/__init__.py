"""Dynamic multiobjective optimization with an online SVM-based predictor.

A benchmarking framework for change-driven multiobjective optimization:
after every environment change the previously found Pareto set is
oversampled into a balanced training batch, an incremental RBF-SVM is
updated online, and the classifier filters random candidates into the
initial population handed to a static multiobjective optimizer.
"""

from .core import (
    ConfigurationError,
    ContractViolationError,
    DynamicProblem,
    Individual,
    Population,
    TimeContext,
    current_time,
    dominates,
    nondominated_filter,
)
from .harness import ExperimentConfig, RunRecord, run_experiment, run_framework, summarize
from .isvm import IncrementalSvm, RbfKernel, batch_oracle, grid_search_scale
from .metrics import MetricTrace, hv, igd, mhv, migd, ranksum_test, reference_point
from .posmote import LabeledSampleSet, PosmoteConfig, posmote
from .predictor import PredictorConfig, predict_population
from .problems import available_problems, get_problem, register_problem

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ContractViolationError",
    "DynamicProblem",
    "ExperimentConfig",
    "IncrementalSvm",
    "Individual",
    "LabeledSampleSet",
    "MetricTrace",
    "Population",
    "PosmoteConfig",
    "PredictorConfig",
    "RbfKernel",
    "RunRecord",
    "TimeContext",
    "available_problems",
    "batch_oracle",
    "current_time",
    "dominates",
    "get_problem",
    "grid_search_scale",
    "hv",
    "igd",
    "mhv",
    "migd",
    "nondominated_filter",
    "posmote",
    "predict_population",
    "ranksum_test",
    "reference_point",
    "register_problem",
    "run_experiment",
    "run_framework",
    "summarize",
    "__version__",
]
