"""
Camera-wise train / val / test splitting

Whole cameras go to test; the remaining bursts are shuffled with a seeded
PCG64 generator and whole bursts are moved to val, so near-duplicate frames
never straddle partitions.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, List, Mapping, Sequence

import numpy as np
import pandas as pd

from annotation.weak_annotator import WeakAnnotation
from errors import MissingLabelError, NoTrainingDataError

logger = logging.getLogger(__name__)

PARTITIONS = ("train", "val", "test")


@dataclass(frozen=True)
class DatasetSplit:
    train: List[WeakAnnotation]
    val: List[WeakAnnotation]
    test: List[WeakAnnotation]
    split_report: Dict[str, dict] = field(default_factory=dict)

    def partition(self, name: str) -> List[WeakAnnotation]:
        return getattr(self, name)

    def partition_of(self) -> Dict[str, str]:
        return {anno.image_id: name for name in PARTITIONS for anno in self.partition(name)}


def _split_report(partitions: Mapping[str, List[WeakAnnotation]],
                  camera_of: Mapping[str, str]) -> Dict[str, dict]:
    rows = [
        {"partition": name, "camera_id": camera_of[anno.image_id], "class_id": anno.class_id}
        for name, annos in partitions.items()
        for anno in annos
    ]
    df = pd.DataFrame(rows, columns=["partition", "camera_id", "class_id"])
    report = {}
    for name in PARTITIONS:
        part = df[df["partition"] == name]
        report[name] = {
            "images": int(len(part)),
            "per_camera": {str(k): int(v) for k, v in part["camera_id"].value_counts().sort_index().items()},
            "per_class": {str(k): int(v) for k, v in part["class_id"].value_counts().sort_index().items()},
        }
    return report


def split_by_camera(annos: Sequence[WeakAnnotation],
                    camera_of: Mapping[str, str],
                    burst_of: Mapping[str, str],
                    test_cameras: AbstractSet[str],
                    val_fraction: float = 0.05,
                    seed: int = 0) -> DatasetSplit:
    if not 0.0 <= val_fraction < 1.0:
        raise ValueError(f"val_fraction must lie in [0, 1), got {val_fraction}")
    for anno in annos:
        if anno.image_id not in camera_of:
            raise MissingLabelError(anno.image_id, what="camera")
        if anno.image_id not in burst_of:
            raise MissingLabelError(anno.image_id, what="burst")

    test_cameras = set(test_cameras)
    cameras = {camera_of[anno.image_id] for anno in annos}
    if cameras and cameras <= test_cameras:
        raise NoTrainingDataError(
            f"no training data: test cameras {sorted(test_cameras)} cover every camera"
        )

    test = [anno for anno in annos if camera_of[anno.image_id] in test_cameras]
    remaining = [anno for anno in annos if camera_of[anno.image_id] not in test_cameras]

    burst_ids = sorted({burst_of[anno.image_id] for anno in remaining})
    rng = np.random.Generator(np.random.PCG64(seed))
    shuffled = [burst_ids[i] for i in rng.permutation(len(burst_ids))]
    # ceil of the product rounded to 9 places
    n_val = math.ceil(round(val_fraction * len(burst_ids), 9))
    val_bursts = set(shuffled[:n_val])

    val = [anno for anno in remaining if burst_of[anno.image_id] in val_bursts]
    train = [anno for anno in remaining if burst_of[anno.image_id] not in val_bursts]

    def by_id(items):
        return sorted(items, key=lambda anno: anno.image_id)

    partitions = {"train": by_id(train), "val": by_id(val), "test": by_id(test)}
    logger.info(
        f"Split {len(annos)} images: {len(train)} train / {len(val)} val / {len(test)} test "
        f"({n_val} of {len(burst_ids)} bursts to val)"
    )
    return DatasetSplit(
        train=partitions["train"],
        val=partitions["val"],
        test=partitions["test"],
        split_report=_split_report(partitions, camera_of),
    )
