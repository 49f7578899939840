"""Minimum-cost sensor channel subset selection.

Finds the cheapest subset of sensor channels whose task performance stays
above a lower bound, via branch-and-bound (globally optimal under a monotone
performance function), greedy backward elimination (O(n^2) evaluations), or
exhaustive enumeration, against pluggable performance evaluators.
"""

from .bnb import BnbOutcome, BnbStats, branch_and_bound, verify_pruning_soundness
from .errors import ChanselectError
from .evaluators import (
    CentroidClassifier,
    ExternalEvaluator,
    ExternalEvaluatorConfig,
    MemoizedEvaluator,
    PerformanceFunction,
    SyntheticMonotoneFunction,
    TableOracle,
    external_evaluate,
    memoize,
    train_centroid,
    verify_monotone,
    verify_table_monotone,
)
from .exhaustive import ExhaustiveOutcome, exhaustive_search
from .greedy import GreedyOutcome, alpha_sweep, alpha_sweep_csv, greedy_select
from .model import (
    ChannelSet,
    CostModel,
    Direction,
    EvaluatedSubset,
    ScoreParams,
    children,
    cost_savings,
    equal_costs,
    evaluate_subset,
    load_cost_model_csv,
    normalize_costs,
    savings_from_cost,
    score,
    subset_cost,
)
from .windowing import (
    DatasetSchema,
    RawRecording,
    SplitSpec,
    WindowedFeatureSet,
    WindowedSamples,
    extract_features,
    load_csv,
    window_signal,
)

__version__ = "0.1.0"

__all__ = [
    "BnbOutcome",
    "BnbStats",
    "CentroidClassifier",
    "ChannelSet",
    "ChanselectError",
    "CostModel",
    "DatasetSchema",
    "Direction",
    "EvaluatedSubset",
    "ExhaustiveOutcome",
    "ExternalEvaluator",
    "ExternalEvaluatorConfig",
    "GreedyOutcome",
    "MemoizedEvaluator",
    "PerformanceFunction",
    "RawRecording",
    "ScoreParams",
    "SplitSpec",
    "SyntheticMonotoneFunction",
    "TableOracle",
    "WindowedFeatureSet",
    "WindowedSamples",
    "alpha_sweep",
    "alpha_sweep_csv",
    "branch_and_bound",
    "children",
    "cost_savings",
    "equal_costs",
    "evaluate_subset",
    "exhaustive_search",
    "external_evaluate",
    "extract_features",
    "greedy_select",
    "load_cost_model_csv",
    "load_csv",
    "memoize",
    "normalize_costs",
    "savings_from_cost",
    "score",
    "subset_cost",
    "train_centroid",
    "verify_monotone",
    "verify_pruning_soundness",
    "verify_table_monotone",
    "window_signal",
]
