"""Evaluate binary tabular predictors under time-based versus random splits."""

from .data import (
    CompoundRecord,
    DataError,
    DatasetBundle,
    FeatureTable,
    LabelTable,
    MonthDate,
    SynonymMap,
    intersect_compounds,
    load_feature_table,
    load_label_table,
    normalize_names,
)
from .evaluation import RunRecord, build_comparison_report, run_grid, train_fold_ensemble
from .features import apply_filter_pipeline
from .importance import permutation_importance
from .learners import LearnerSpec, predict_proba, train
from .leakage import top_feature_lag_test
from .metrics import average_precision, compute_metrics, roc_auc
from .splits import SplitPlan, random_split, stratified_kfold, time_split
from .stats import normal_cdf, normal_quantile, paired_t_test_one_sided, stouffer_combine

__version__ = "0.1.0"
