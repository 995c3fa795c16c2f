"""
nMNIST Testbed - Tiny-object benchmark built from MNIST digits

Every canvas is a black square holding a cloud of 28x28 digits; positives hold
exactly one '3'. Canvas side controls the object-to-image ratio (O2I), so the
four standard configurations sweep the object size from large to tiny.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dataset_io.coco import CocoDocument
from dataset_io.idx import parse_idx
from dataset_io.images import encode_png
from errors import TestbedError
from imaging.image_core import BoundingBox, ImageBuffer
from tools.report_tables import write_json

logger = logging.getLogger(__name__)

DIGIT_SIDE = 28
TARGET_DIGIT = 3
MAX_ATTEMPTS = 1000
CANDIDATE_BATCH = 64

STANDARD_LAYOUT = ((64, 3), (128, 6), (256, 26), (512, 101))
STANDARD_SIZES = (11276, 1972, 4040)


def digit_o2i(canvas_side: int) -> float:
    return DIGIT_SIDE * DIGIT_SIDE / float(canvas_side * canvas_side)


class TestbedSpec(BaseModel):
    """One nMNIST configuration."""

    __test__ = False
    model_config = ConfigDict(frozen=True)

    o2i: float = Field(gt=0.0, le=1.0)
    canvas_side: int = Field(ge=DIGIT_SIDE)
    digit_count: int = Field(ge=1)
    n_train: int = Field(default=STANDARD_SIZES[0], ge=0)
    n_val: int = Field(default=STANDARD_SIZES[1], ge=0)
    n_test: int = Field(default=STANDARD_SIZES[2], ge=0)
    positive_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0)
    max_pair_overlap_iou: float = Field(default=0.25, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _o2i_matches_canvas(self):
        expected = digit_o2i(self.canvas_side)
        if abs(self.o2i - expected) > 0.005:
            raise ValueError(
                f"o2i {self.o2i:.4f} does not match a {self.canvas_side}px canvas "
                f"(784/{self.canvas_side}^2 = {expected:.4f})"
            )
        return self

    @classmethod
    def custom(cls, canvas_side: int, digit_count: int, **kwargs) -> "TestbedSpec":
        return cls(o2i=digit_o2i(canvas_side), canvas_side=canvas_side, digit_count=digit_count, **kwargs)

    def split_sizes(self) -> Dict[str, int]:
        return {"train": self.n_train, "val": self.n_val, "test": self.n_test}


def standard_specs(seed: int = 0) -> List[TestbedSpec]:
    return [TestbedSpec.custom(side, digits, seed=seed) for side, digits in STANDARD_LAYOUT]


class DigitPool:
    """MNIST digits split into target ('3') and non-target indices."""

    def __init__(self, images: np.ndarray, labels: np.ndarray):
        images = np.asarray(images, dtype=np.uint8)
        labels = np.asarray(labels).astype(np.int64)
        if images.shape[0] == 0:
            raise TestbedError("empty digit pool")
        if images.shape[1:] != (DIGIT_SIDE, DIGIT_SIDE):
            raise TestbedError(f"digits must be {DIGIT_SIDE}x{DIGIT_SIDE}, got {images.shape[1:]}")
        if images.shape[0] != labels.shape[0]:
            raise TestbedError(f"{images.shape[0]} digits but {labels.shape[0]} labels")
        self.images = images
        self.labels = labels
        self.targets = np.flatnonzero(labels == TARGET_DIGIT)
        self.others = np.flatnonzero(labels != TARGET_DIGIT)
        if self.targets.size == 0 or self.others.size == 0:
            raise TestbedError("digit pool must contain both '3' and non-'3' digits")

    @classmethod
    def from_idx(cls, images_path, labels_path) -> "DigitPool":
        return cls.from_pairs(parse_idx(images_path, labels_path))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[ImageBuffer, int]]) -> "DigitPool":
        if not pairs:
            raise TestbedError("empty digit pool")
        return cls(np.stack([img.pixels[:, :, 0] for img, _ in pairs]),
                   np.array([label for _, label in pairs]))

    def __len__(self):
        return int(self.images.shape[0])


@dataclass(frozen=True)
class TestbedSample:
    __test__ = False

    canvas: ImageBuffer
    positive: bool
    target_boxes: Tuple[BoundingBox, ...]
    placements: Tuple[Tuple[int, BoundingBox], ...]

    @property
    def label(self) -> int:
        return int(self.positive)


def _pairwise_iou(candidates: np.ndarray, placed: np.ndarray) -> np.ndarray:
    """IoU of equal-size square boxes given by their top-left corners."""
    dx = np.clip(DIGIT_SIDE - np.abs(candidates[:, None, 0] - placed[None, :, 0]), 0, None)
    dy = np.clip(DIGIT_SIDE - np.abs(candidates[:, None, 1] - placed[None, :, 1]), 0, None)
    inter = dx * dy
    return inter / (2.0 * DIGIT_SIDE * DIGIT_SIDE - inter)


def _place(rng: np.random.Generator, placed: np.ndarray, span: int, max_iou: float) -> np.ndarray:
    candidate = None
    drawn = 0
    while drawn < MAX_ATTEMPTS:
        batch = min(CANDIDATE_BATCH, MAX_ATTEMPTS - drawn)
        candidates = rng.integers(0, span, size=(batch, 2))
        drawn += batch
        if placed.shape[0] == 0:
            return candidates[0]
        fits = np.flatnonzero((_pairwise_iou(candidates, placed) <= max_iou).all(axis=1))
        if fits.size:
            return candidates[fits[0]]
        candidate = candidates[-1]
    # overlap cap cannot be met; keep the last draw
    return candidate


def generate_sample(spec: TestbedSpec, digits: DigitPool, want_positive: bool,
                    rng: np.random.Generator) -> TestbedSample:
    """Compose one canvas; same spec, pool, flag and generator state give the same sample."""
    n_others = spec.digit_count - 1 if want_positive else spec.digit_count
    chosen = list(rng.choice(digits.others, size=n_others, replace=True))
    if want_positive:
        chosen.append(int(rng.choice(digits.targets)))
        chosen = [chosen[i] for i in rng.permutation(len(chosen))]

    side = spec.canvas_side
    span = side - DIGIT_SIDE + 1
    canvas = np.zeros((side, side), dtype=np.uint8)
    corners = np.empty((0, 2), dtype=np.int64)
    placements = []
    for index in chosen:
        x, y = (int(v) for v in _place(rng, corners, span, spec.max_pair_overlap_iou))
        corners = np.vstack([corners, [x, y]])
        region = canvas[y:y + DIGIT_SIDE, x:x + DIGIT_SIDE]
        np.maximum(region, digits.images[index], out=region)
        placements.append((int(digits.labels[index]), BoundingBox(x, y, DIGIT_SIDE, DIGIT_SIDE)))

    targets = tuple(box for digit, box in placements if digit == TARGET_DIGIT)
    return TestbedSample(ImageBuffer(canvas), bool(targets), targets, tuple(placements))


def split_labels(n: int, positive_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Shuffled positive flags; odd remainders go to the positives."""
    n_pos = min(n, math.ceil(round(n * positive_fraction, 9)))
    flags = np.zeros(n, dtype=bool)
    flags[:n_pos] = True
    return flags[rng.permutation(n)]


_WORKER_POOLS: Dict[str, DigitPool] = {}


def _init_worker(pools: Dict[str, DigitPool]):
    _WORKER_POOLS.update(pools)


def _render_chunk(job, pools: Optional[Dict[str, DigitPool]] = None) -> List[dict]:
    spec, split_no, split, pool_name, indices, flags, split_dir = job
    pool = (pools if pools is not None else _WORKER_POOLS)[pool_name]
    rows = []
    for index, positive in zip(indices, flags):
        rng = np.random.default_rng([spec.seed, split_no, index])
        sample = generate_sample(spec, pool, bool(positive), rng)
        image_id = f"{split}_{index:06d}"
        encode_png(sample.canvas, Path(split_dir) / f"{image_id}.png")
        rows.append({
            "image_id": image_id,
            "label": sample.label,
            "target_boxes": [box.as_list() for box in sample.target_boxes],
        })
    return rows


def _chunks(n: int, size: int):
    for start in range(0, n, size):
        yield list(range(start, min(n, start + size)))


def _write_split_files(spec: TestbedSpec, split_dir: Path, rows: List[dict]):
    pd.DataFrame(rows, columns=["image_id", "label"]).to_csv(split_dir / "labels.csv", index=False, lineterminator="\n")
    doc = CocoDocument({"description": "nMNIST tiny-object testbed", "o2i": spec.o2i})
    doc.add_category(TARGET_DIGIT, f"digit_{TARGET_DIGIT}", supercategory="digit")
    for row in rows:
        image = doc.add_image(f"{row['image_id']}.png", spec.canvas_side, spec.canvas_side)
        for bbox in row["target_boxes"]:
            doc.add_annotation(image["id"], TARGET_DIGIT, BoundingBox(*bbox))
    doc.write(split_dir / "coco.json")


def generate_dataset(spec: TestbedSpec, train_pool: DigitPool, test_pool: DigitPool, out_dir,
                     limit: Optional[int] = None, workers: int = 1, chunk_size: int = 256) -> dict:
    """Write the train/val/test splits of one configuration and return the manifest.

    Train and val digits come from train_pool, test digits from test_pool.
    """
    out_dir = Path(out_dir)
    pools = {"train": train_pool, "test": test_pool}
    manifest = {"spec": spec.model_dump(), "o2i_pct": round(100.0 * spec.o2i, 4), "splits": {}}
    if limit is not None:
        manifest["limit"] = int(limit)

    executor = None
    if workers > 1:
        executor = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(pools,))
    render = partial(_render_chunk, pools=pools)

    try:
        for split_no, (split, size) in enumerate(spec.split_sizes().items()):
            n = size if limit is None else min(size, int(limit))
            split_dir = out_dir / split
            split_dir.mkdir(parents=True, exist_ok=True)
            flags = split_labels(n, spec.positive_fraction, np.random.default_rng([spec.seed, split_no]))
            pool_name = "test" if split == "test" else "train"
            jobs = [
                (spec, split_no, split, pool_name, idx, [bool(flags[i]) for i in idx], str(split_dir))
                for idx in _chunks(n, chunk_size)
            ]
            results = executor.map(_render_chunk, jobs) if executor else map(render, jobs)
            rows = [row for chunk in results for row in chunk]

            _write_split_files(spec, split_dir, rows)
            positives = sum(row["label"] for row in rows)
            manifest["splits"][split] = {"images": n, "positives": positives, "negatives": n - positives}
            logger.info(f"{split}: {n} canvases ({positives} positive) written to {split_dir}")
    finally:
        if executor:
            executor.shutdown()

    write_json(manifest, out_dir / "manifest.json")
    return manifest
