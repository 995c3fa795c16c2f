"""
Evaluator - Presence / taxa error reports, localization scores and review queue
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix

from annotation.weak_annotator import EMPTY_CLASS, LabelMapping
from errors import MissingLabelError
from imaging.image_core import BoundingBox, box_iou

logger = logging.getLogger(__name__)

OUTCOMES = ("correct", "presence_fn", "presence_fp", "taxa_error")
CHALLENGE_TAGS = ("good", "bad_framed", "blur", "hidden", "tiny", "unknown", "untagged")
TINY_O2I = 0.002


@dataclass(frozen=True)
class PredictionRecord:
    image_id: str
    predicted_class: int
    posterior: float

    def __post_init__(self):
        if not 0.0 <= self.posterior <= 1.0:
            raise ValueError(f"posterior {self.posterior} for '{self.image_id}' is outside [0, 1]")
        if self.predicted_class < 0:
            raise ValueError(f"negative predicted_class for '{self.image_id}'")


@dataclass(frozen=True)
class ClassificationReport:
    presence_fn_pct: float
    presence_fp_pct: float
    taxa_error_pct: float
    accuracy_pct: float
    counts: Dict[str, int]
    confusion: Dict[int, Dict[int, int]] = field(default_factory=dict)

    @property
    def n_images(self) -> int:
        return sum(self.counts.values())

    def as_dict(self) -> dict:
        return {
            "presence_fn_pct": round(self.presence_fn_pct, 4),
            "presence_fp_pct": round(self.presence_fp_pct, 4),
            "taxa_error_pct": round(self.taxa_error_pct, 4),
            "accuracy_pct": round(self.accuracy_pct, 4),
            "counts": dict(self.counts),
            "n_images": self.n_images,
            "confusion": {
                str(truth): {str(pred): n for pred, n in row.items()}
                for truth, row in self.confusion.items()
            },
        }


@dataclass(frozen=True)
class LocalizationReport:
    correct_pct: float
    fp_pct: float
    fn_pct: float
    n_frames: int

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.correct_pct, self.fp_pct, self.fn_pct

    def as_dict(self) -> dict:
        return {
            "correct_pct": round(self.correct_pct, 4),
            "fp_pct": round(self.fp_pct, 4),
            "fn_pct": round(self.fn_pct, 4),
            "n_frames": self.n_frames,
        }


def classify_outcome(truth_class: int, predicted_class: int) -> str:
    if truth_class == predicted_class:
        return "correct"
    if predicted_class == EMPTY_CLASS:
        return "presence_fn"
    if truth_class == EMPTY_CLASS:
        return "presence_fp"
    return "taxa_error"


def _pct(count: int, total: int) -> float:
    return 100.0 * count / total if total else 0.0


def classification_report(preds: Sequence[PredictionRecord], truth: LabelMapping) -> ClassificationReport:
    truth_classes, predicted_classes = [], []
    counts = Counter({outcome: 0 for outcome in OUTCOMES})
    for pred in preds:
        if pred.image_id not in truth:
            raise MissingLabelError(pred.image_id, what="truth entry")
        truth_class = truth[pred.image_id]
        counts[classify_outcome(truth_class, pred.predicted_class)] += 1
        truth_classes.append(truth_class)
        predicted_classes.append(pred.predicted_class)

    confusion: Dict[int, Dict[int, int]] = {}
    if preds:
        classes = sorted(set(truth_classes) | set(predicted_classes))
        matrix = confusion_matrix(truth_classes, predicted_classes, labels=classes)
        confusion = {
            t: {p: int(matrix[i, j]) for j, p in enumerate(classes) if matrix[i, j]}
            for i, t in enumerate(classes)
            if matrix[i].any()
        }

    total = len(preds)
    return ClassificationReport(
        presence_fn_pct=_pct(counts["presence_fn"], total),
        presence_fp_pct=_pct(counts["presence_fp"], total),
        taxa_error_pct=_pct(counts["taxa_error"], total),
        accuracy_pct=_pct(counts["correct"], total),
        counts=dict(counts),
        confusion=confusion,
    )


def review_queue(preds: Sequence[PredictionRecord]) -> List[str]:
    """Least confident first; ties in image_id order."""
    return [pred.image_id for pred in sorted(preds, key=lambda p: (p.posterior, p.image_id))]


def localization_report(loc, truth: Mapping[str, Optional[BoundingBox]],
                        iou_min: float = 0.5) -> LocalizationReport:
    counts = Counter()
    for frame in loc:
        if frame.image_id not in truth:
            raise MissingLabelError(frame.image_id, what="truth entry")
        truth_box = truth[frame.image_id]
        box = frame.best_box
        if truth_box is None:
            counts["fp" if box is not None else "correct"] += 1
        elif box is not None and box_iou(box, truth_box) >= iou_min:
            counts["correct"] += 1
        else:
            counts["fn"] += 1
    total = sum(counts.values())
    return LocalizationReport(
        correct_pct=_pct(counts["correct"], total),
        fp_pct=_pct(counts["fp"], total),
        fn_pct=_pct(counts["fn"], total),
        n_frames=total,
    )


def vote_by_burst(preds: Sequence[PredictionRecord], burst_of: Mapping[str, str]) -> List[PredictionRecord]:
    """Replace each frame's class with its burst's majority class.

    Ties go to the class with the higher mean posterior, then the smaller id.
    The posterior becomes the winning class's mean posterior in the burst.
    """
    members: Dict[str, List[PredictionRecord]] = defaultdict(list)
    for pred in preds:
        members[burst_of.get(pred.image_id, pred.image_id)].append(pred)

    decided: Dict[str, Tuple[int, float]] = {}
    for burst_id, group in members.items():
        votes: Dict[int, List[float]] = defaultdict(list)
        for pred in group:
            votes[pred.predicted_class].append(pred.posterior)
        winner = min(votes, key=lambda c: (-len(votes[c]), -float(np.mean(votes[c])), c))
        decided[burst_id] = (winner, float(np.mean(votes[winner])))

    voted = []
    for pred in preds:
        winner, posterior = decided[burst_of.get(pred.image_id, pred.image_id)]
        voted.append(PredictionRecord(pred.image_id, winner, min(1.0, max(0.0, posterior))))
    return voted


def _effective_tag(image_id: str, truth: LabelMapping,
                   truth_boxes: Optional[Mapping[str, Optional[BoundingBox]]],
                   image_size: Optional[Tuple[int, int]]) -> str:
    tag = truth.tags.get(image_id, "untagged")
    if tag != "tiny":
        return tag
    box = (truth_boxes or {}).get(image_id)
    if box is None or image_size is None:
        return "untagged"
    o2i = box.area / float(image_size[0] * image_size[1])
    return "tiny" if o2i < TINY_O2I else "untagged"


def challenge_breakdown(preds: Sequence[PredictionRecord], truth: LabelMapping,
                        truth_boxes: Optional[Mapping[str, Optional[BoundingBox]]] = None,
                        image_size: Optional[Tuple[int, int]] = None) -> Dict[str, Dict[str, float]]:
    """Outcome x challenge-tag table, each cell a percentage of all images."""
    cells = Counter()
    for pred in preds:
        if pred.image_id not in truth:
            raise MissingLabelError(pred.image_id, what="truth entry")
        outcome = classify_outcome(truth[pred.image_id], pred.predicted_class)
        tag = _effective_tag(pred.image_id, truth, truth_boxes, image_size)
        cells[(outcome, tag)] += 1

    total = len(preds)
    tags = [t for t in CHALLENGE_TAGS if any(tag == t for _, tag in cells)]
    tags += sorted({tag for _, tag in cells} - set(tags))
    return {
        outcome: {tag: _pct(cells[(outcome, tag)], total) for tag in tags}
        for outcome in OUTCOMES
    }
