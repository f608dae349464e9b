"""Job-level explanation: C4.5 initial approximation, pairing-and-comparing and a small random forest."""

from .evaluation import (
    EvaluationError,
    FidelityReport,
    auc_trapezoid,
    confusion_matrix,
    evaluate_classifier,
    fidelity_from_scores,
    roc_curve,
)
from .forest import (
    MAX_TREES,
    DecisionPath,
    ForestError,
    RandomForest,
    classify_pair,
    decision_paths,
    feature_usage,
    train_rf,
)
from .pairing import NP, PN, PairedInstance, mixed_leaves, pair_instances, route_to_forest
from .tree import DecisionTree, gain_ratio, grow_tree, train_c45
