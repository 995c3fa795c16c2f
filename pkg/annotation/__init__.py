"""
Annotation module for weaktrap
"""

from .weak_annotator import (
    EMPTY_CLASS,
    AnnotationStatus,
    FnPolicy,
    LabelMapping,
    QualityReport,
    TruthRecord,
    WeakAnnotation,
    annotation_quality,
    correct,
    status_counts,
)
from .splits import PARTITIONS, DatasetSplit, split_by_camera

__all__ = [
    'EMPTY_CLASS',
    'PARTITIONS',
    'AnnotationStatus',
    'DatasetSplit',
    'FnPolicy',
    'LabelMapping',
    'QualityReport',
    'TruthRecord',
    'WeakAnnotation',
    'annotation_quality',
    'correct',
    'split_by_camera',
    'status_counts',
]
