"""
Motion Localizer - Finds moving animals in a camera-trap burst

Per frame: median background -> motion map -> threshold -> erosion ->
dilation -> largest connected components.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

import config
from errors import DimensionMismatchError, EmptySequenceError
from imaging.image_core import (
    BinaryMask,
    BoundingBox,
    BurstSequence,
    FloatMap,
    ImageBuffer,
    bounding_box_of,
)
from imaging.morphology import dilate, erode, label_components

logger = logging.getLogger(__name__)


class LocalizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    threshold_t: float = Field(default=config.THRESHOLD_T, gt=0.0, lt=1.0)
    erosion_kernel: int = config.EROSION_KERNEL
    dilation_kernel: int = config.DILATION_KERNEL
    connectivity: int = config.CONNECTIVITY
    min_component_area: int = Field(default=config.MIN_COMPONENT_AREA, ge=1)
    max_components: int = Field(default=config.MAX_COMPONENTS, ge=1)
    tighten_boxes: bool = config.TIGHTEN_BOXES

    @field_validator("erosion_kernel", "dilation_kernel")
    @classmethod
    def _odd_kernel(cls, value):
        if value < 1 or value % 2 == 0:
            raise ValueError(f"kernel must be odd and >= 1, got {value}")
        return value

    @field_validator("connectivity")
    @classmethod
    def _connectivity(cls, value):
        if value not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {value}")
        return value


@dataclass(frozen=True)
class FrameLocalization:
    image_id: str
    boxes: Tuple[BoundingBox, ...]
    component_areas: Tuple[int, ...]

    @property
    def best_box(self) -> Optional[BoundingBox]:
        return self.boxes[0] if self.boxes else None


@dataclass(frozen=True)
class LocalizationResult:
    frames: Tuple[FrameLocalization, ...]

    def __iter__(self):
        return iter(self.frames)

    def __len__(self):
        return len(self.frames)

    @property
    def image_ids(self) -> List[str]:
        return [frame.image_id for frame in self.frames]

    def by_image(self):
        return {frame.image_id: frame for frame in self.frames}

    @classmethod
    def merge(cls, results) -> "LocalizationResult":
        frames = [frame for result in results for frame in result.frames]
        frames.sort(key=lambda frame: frame.image_id)
        return cls(tuple(frames))


@dataclass(frozen=True)
class FrameTrace:
    image_id: str
    motion: FloatMap
    thresholded: BinaryMask
    denoised: BinaryMask
    localization: FrameLocalization


@dataclass(frozen=True)
class LocalizationTrace:
    """Every intermediate map of one burst, for debug dumps."""

    burst: BurstSequence
    background: ImageBuffer
    frames: Tuple[FrameTrace, ...]

    @property
    def result(self) -> LocalizationResult:
        return LocalizationResult(tuple(frame.localization for frame in self.frames))


def compute_background(burst: BurstSequence) -> ImageBuffer:
    """Per-pixel, per-channel median; lower median for even frame counts."""
    if burst is None or not burst.frames:
        raise EmptySequenceError()
    stack = burst.stack()
    if burst.n == 1:
        return ImageBuffer(stack[0])
    median_index = (burst.n - 1) // 2
    background = np.partition(stack, median_index, axis=0)[median_index]
    return ImageBuffer(background)


def motion_map(frame: ImageBuffer, background: ImageBuffer) -> FloatMap:
    if frame.shape != background.shape:
        raise DimensionMismatchError(
            f"Frame shape {frame.shape} does not match background shape {background.shape}"
        )
    diff = frame.pixels.astype(np.float32) - background.pixels.astype(np.float32)
    distance = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    values = distance / (255.0 * np.sqrt(frame.channels))
    return FloatMap(np.clip(values, 0.0, 1.0))


def threshold(motion: FloatMap, t: float) -> BinaryMask:
    if not 0.0 < t < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {t}")
    return BinaryMask(motion.values >= np.float32(t))


def _tightened(thresholded: BinaryMask, labels: np.ndarray, label: int, fallback: BoundingBox) -> BoundingBox:
    footprint = labels[fallback.y:fallback.y2, fallback.x:fallback.x2] == label
    inside = thresholded.bits[fallback.y:fallback.y2, fallback.x:fallback.x2] & footprint
    tight = bounding_box_of(inside)
    if tight is None:
        return fallback
    return BoundingBox(fallback.x + tight.x, fallback.y + tight.y, tight.w, tight.h)


def _localize_frame(image_id: str, frame: ImageBuffer, background: ImageBuffer,
                    cfg: LocalizerConfig) -> FrameTrace:
    motion = motion_map(frame, background)
    thresholded = threshold(motion, cfg.threshold_t)
    denoised = dilate(erode(thresholded, cfg.erosion_kernel), cfg.dilation_kernel)
    labels, entries = label_components(denoised, cfg.connectivity)

    boxes, areas = [], []
    for label, component in entries:
        if component.area < cfg.min_component_area:
            continue
        box = component.box
        if cfg.tighten_boxes:
            box = _tightened(thresholded, labels, label, box)
        boxes.append(box)
        areas.append(component.area)
        if len(boxes) == cfg.max_components:
            break

    localization = FrameLocalization(image_id, tuple(boxes), tuple(areas))
    return FrameTrace(image_id, motion, thresholded, denoised, localization)


def trace_burst(burst: BurstSequence, cfg: Optional[LocalizerConfig] = None) -> LocalizationTrace:
    cfg = cfg or LocalizerConfig()
    background = compute_background(burst)
    frames = tuple(
        _localize_frame(frame.image_id, frame.image, background, cfg)
        for frame in burst.frames
    )
    return LocalizationTrace(burst, background, frames)


def localize(burst: BurstSequence, cfg: Optional[LocalizerConfig] = None) -> LocalizationResult:
    result = trace_burst(burst, cfg).result
    logger.debug(
        "Burst %s (%s): %d frame(s), %d with boxes",
        burst.burst_id, burst.camera_id, burst.n,
        sum(1 for frame in result if frame.boxes),
    )
    return result
