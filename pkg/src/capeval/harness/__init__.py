"""Dataset ingestion, batch scoring and the evaluation protocols."""

from .datasets import (
    DistractionInstance,
    Distractor,
    EvalInstance,
    TripletInstance,
    load_distraction_dataset,
    load_external_scores,
    load_judged_dataset,
    load_triplet_dataset,
)
from .protocols import (
    AccuracyReport,
    CorrelationReport,
    correlation_report,
    distraction_accuracy,
    forced_choice_accuracy,
    mean_correlations,
)
from .scoring import ScoreTable, ScoringResources, make_caption_scorer, score_dataset

__all__ = [
    "AccuracyReport",
    "CorrelationReport",
    "DistractionInstance",
    "Distractor",
    "EvalInstance",
    "ScoreTable",
    "ScoringResources",
    "TripletInstance",
    "correlation_report",
    "distraction_accuracy",
    "forced_choice_accuracy",
    "load_distraction_dataset",
    "load_external_scores",
    "load_judged_dataset",
    "load_triplet_dataset",
    "make_caption_scorer",
    "mean_correlations",
    "score_dataset",
]
