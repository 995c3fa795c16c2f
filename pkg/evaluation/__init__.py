"""
Evaluation module for weaktrap
"""

from .evaluator import (
    CHALLENGE_TAGS,
    OUTCOMES,
    ClassificationReport,
    LocalizationReport,
    PredictionRecord,
    challenge_breakdown,
    classification_report,
    classify_outcome,
    localization_report,
    review_queue,
    vote_by_burst,
)

__all__ = [
    'CHALLENGE_TAGS',
    'OUTCOMES',
    'ClassificationReport',
    'LocalizationReport',
    'PredictionRecord',
    'challenge_breakdown',
    'classification_report',
    'classify_outcome',
    'localization_report',
    'review_queue',
    'vote_by_burst',
]
