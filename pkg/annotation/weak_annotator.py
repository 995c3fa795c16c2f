"""
Weak Annotator - Fuses motion boxes with image-level taxa

The FP box correction compares the presence of a detected box with the
presence of an animal in the ecologist's label: a box on an image labelled
empty is dropped, and only the biggest box is kept for an animal image.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from errors import MissingLabelError
from imaging.image_core import BoundingBox, box_iou

logger = logging.getLogger(__name__)

EMPTY_CLASS = 0


@dataclass(frozen=True)
class LabelMapping:
    """image_id -> class_id; class 0 means empty, taxa start at 1."""

    entries: Dict[str, int]
    class_names: Dict[int, str] = field(default_factory=dict)
    tags: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for image_id, class_id in self.entries.items():
            if class_id < 0:
                raise ValueError(f"Negative class id {class_id} for '{image_id}'")

    def __getitem__(self, image_id: str) -> int:
        try:
            return self.entries[image_id]
        except KeyError:
            raise MissingLabelError(image_id) from None

    def __contains__(self, image_id) -> bool:
        return image_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def taxa(self) -> List[int]:
        """Sorted class ids >= 1 seen in the mapping or the name table."""
        return sorted({c for c in self.entries.values() if c != EMPTY_CLASS}
                      | {c for c in self.class_names if c != EMPTY_CLASS})

    def class_name(self, class_id: int) -> str:
        return self.class_names.get(class_id, f"taxon_{class_id}")


class AnnotationStatus(str, Enum):
    BOX_AND_ANIMAL = "box_and_animal"
    FP_CORRECTED = "fp_corrected"
    FN_UNLOCALIZED = "fn_unlocalized"
    TRUE_EMPTY = "true_empty"


class FnPolicy(str, Enum):
    KEEP_AS_UNLOCALIZED = "keep_as_unlocalized"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class WeakAnnotation:
    image_id: str
    class_id: int
    box: Optional[BoundingBox]
    status: AnnotationStatus

    def __post_init__(self):
        has_box = self.box is not None
        animal = self.class_id >= 1
        valid = {
            AnnotationStatus.BOX_AND_ANIMAL: has_box and animal,
            AnnotationStatus.FP_CORRECTED: not has_box and not animal,
            AnnotationStatus.FN_UNLOCALIZED: not has_box and animal,
            AnnotationStatus.TRUE_EMPTY: not has_box and not animal,
        }[self.status]
        if not valid:
            raise ValueError(
                f"Inconsistent annotation for {self.image_id}: status {self.status.value}, "
                f"class {self.class_id}, box {'present' if has_box else 'absent'}"
            )

    @property
    def box_detected(self) -> bool:
        """True when the localizer produced a box, before correction."""
        return self.status in (AnnotationStatus.BOX_AND_ANIMAL, AnnotationStatus.FP_CORRECTED)


def correct(loc, labels: LabelMapping,
            fn_policy: FnPolicy = FnPolicy.KEEP_AS_UNLOCALIZED) -> List[WeakAnnotation]:
    """Apply the 2x2 box-presence / label-presence table to every frame."""
    fn_policy = FnPolicy(fn_policy)
    annotations = []
    for frame in loc:
        if frame.image_id not in labels:
            raise MissingLabelError(frame.image_id)
        class_id = labels[frame.image_id]
        box = frame.best_box

        if box is not None and class_id != EMPTY_CLASS:
            anno = WeakAnnotation(frame.image_id, class_id, box, AnnotationStatus.BOX_AND_ANIMAL)
        elif box is not None:
            anno = WeakAnnotation(frame.image_id, EMPTY_CLASS, None, AnnotationStatus.FP_CORRECTED)
        elif class_id != EMPTY_CLASS:
            if fn_policy is FnPolicy.EXCLUDE:
                logger.debug(f"Excluding unlocalized image {frame.image_id}")
                continue
            anno = WeakAnnotation(frame.image_id, class_id, None, AnnotationStatus.FN_UNLOCALIZED)
        else:
            anno = WeakAnnotation(frame.image_id, EMPTY_CLASS, None, AnnotationStatus.TRUE_EMPTY)
        annotations.append(anno)
    return annotations


def status_counts(annotations: Iterable[WeakAnnotation]) -> Dict[str, int]:
    counts = Counter(anno.status.value for anno in annotations)
    return {status.value: counts.get(status.value, 0) for status in AnnotationStatus}


@dataclass(frozen=True)
class TruthRecord:
    image_id: str
    box: Optional[BoundingBox]
    class_id: int


@dataclass(frozen=True)
class QualityReport:
    correct_pct: float
    fp_pct: float
    fn_pct: float
    n_images: int
    outcomes: Tuple[Tuple[str, str], ...] = ()

    def as_dict(self) -> dict:
        return {
            "correct_pct": round(self.correct_pct, 4),
            "fp_pct": round(self.fp_pct, 4),
            "fn_pct": round(self.fn_pct, 4),
            "n_images": self.n_images,
        }


def _quality_outcome(anno: WeakAnnotation, truth: TruthRecord, iou_min: float) -> str:
    if truth.class_id == EMPTY_CLASS:
        return "fp" if anno.box_detected else "correct"
    if not anno.box_detected:
        return "fn"
    if truth.box is None:
        # presence-only truth
        return "correct"
    if anno.box is None:
        return "fn"
    return "correct" if box_iou(anno.box, truth.box) >= iou_min else "fn"


def annotation_quality(annos: Sequence[WeakAnnotation],
                       truth: Iterable[TruthRecord],
                       iou_min: float = 0.5) -> QualityReport:
    """Correct / FP / FN shares of the localizer output, FP counted before correction."""
    truth_by_id: Mapping[str, TruthRecord] = {record.image_id: record for record in truth}
    outcomes = []
    for anno in annos:
        record = truth_by_id.get(anno.image_id)
        if record is None:
            raise MissingLabelError(anno.image_id, what="truth entry")
        outcomes.append((anno.image_id, _quality_outcome(anno, record, iou_min)))

    total = len(outcomes)
    counts = Counter(outcome for _, outcome in outcomes)

    def pct(key):
        return 100.0 * counts.get(key, 0) / total if total else 0.0

    return QualityReport(pct("correct"), pct("fp"), pct("fn"), total, tuple(outcomes))
