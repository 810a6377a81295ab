"""attriforest: from-scratch tabular classification toolkit.

Entropy decision trees with categorical multiway and numeric mean-threshold
splits, bagged random forests with majority voting, leave-one-out and k-fold
cross-validation, fitted preprocessing (median/mode imputation, label and
one-hot encoding, max-abs scaling), EDA reports, classification metrics, a
gradient-descent logistic baseline, and a pipeline CLI.
"""

from .baselines import (
    LogisticConfig,
    LogisticModel,
    LogisticRegressionModel,
    MajorityModel,
    compare_models,
    fit_logreg,
    predict_logreg,
)
from .dtree import (
    BestSplit,
    DecisionTree,
    SplitCandidate,
    TreeModel,
    TreeParams,
    best_split,
    build_tree,
    conditional_entropy,
    entropy,
    information_gain,
    numeric_threshold,
    predict_tree,
)
from .eda import (
    CorrelationMatrix,
    categorical_distribution,
    correlation_matrix,
    numeric_distribution,
    pearson,
)
from .evaluate import (
    CVResult,
    EvaluationReport,
    kfold,
    loocv,
    metrics,
    oversample_minority,
)
from .forest import (
    ForestModel,
    ForestParams,
    RandomForest,
    bootstrap_sample,
    feature_importance,
    fit_forest,
    predict_forest,
)
from .preprocess import (
    EncodingMap,
    FittedPreprocessor,
    apply_encoding,
    apply_impute,
    apply_scale,
    fit_encoding,
    fit_impute,
    fit_scale,
)
from .tabular import (
    ColumnSchema,
    Table,
    TableSchema,
    hr_schema,
    load_csv,
    load_schema,
    missing_counts,
    split_columns,
    write_csv,
)

__version__ = "0.1.0"
