from .classifier import (
    DEFAULT_THRESHOLD,
    BaselineScorer,
    EvalResult,
    PairScore,
    RemoteScorer,
    evaluate_classifier,
    score_pair,
    train_baseline,
)
from .dataset import (
    SUITABLE,
    UNSUITABLE,
    ClassifierDatasetSpec,
    DatasetManifest,
    LabeledPair,
    build_classifier_dataset,
    dataset_from_store,
    read_labeled_jsonl,
    write_labeled_jsonl,
)
from .scoring import FilterTier, ReviewScore, TierReport, aggregate

__all__ = [
    "DEFAULT_THRESHOLD",
    "BaselineScorer",
    "ClassifierDatasetSpec",
    "DatasetManifest",
    "EvalResult",
    "FilterTier",
    "LabeledPair",
    "PairScore",
    "RemoteScorer",
    "ReviewScore",
    "SUITABLE",
    "TierReport",
    "UNSUITABLE",
    "aggregate",
    "build_classifier_dataset",
    "dataset_from_store",
    "evaluate_classifier",
    "read_labeled_jsonl",
    "score_pair",
    "train_baseline",
    "write_labeled_jsonl",
]
