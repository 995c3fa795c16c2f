"""
Synthetic camera-trap bursts with exact ground truth

A textured static background, one bright square moving in a straight line,
and optional nuisance motion: salt-and-pepper noise, global brightness
jitter and small transient blobs (the rain drops and insects that trigger
false boxes on real cameras).
"""

import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import ndimage

from errors import TestbedError
from imaging.image_core import BoundingBox, BurstSequence, Frame, ImageBuffer

BACKGROUND_RANGE = (40, 120)
OBJECT_RANGE = (200, 245)
CELL_SIZE = 32


class SyntheticBurstSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: int = Field(default=320, gt=0)
    height: int = Field(default=240, gt=0)
    n_frames: int = Field(default=3, ge=1)
    object_size: int = Field(default=40, ge=1)
    displacement: int = Field(default=60, ge=0)
    with_object: bool = True
    salt_pepper_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    brightness_jitter: int = Field(default=0, ge=0, le=64)
    distractor_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    distractor_size: int = Field(default=8, ge=1)
    frame_interval: float = Field(default=1.0, ge=0.0)
    seed: int = Field(default=0, ge=0)


def _value_noise(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    low, high = BACKGROUND_RANGE
    grid = rng.uniform(low + 6, high - 6, size=(height // CELL_SIZE + 2, width // CELL_SIZE + 2, 3))
    smooth = ndimage.zoom(grid, (CELL_SIZE, CELL_SIZE, 1), order=1)[:height, :width]
    grain = rng.uniform(-6, 6, size=(height, width, 1))
    return np.clip(smooth + grain, low, high)


def _trajectory(spec: SyntheticBurstSpec, rng: np.random.Generator) -> List[BoundingBox]:
    reach = spec.object_size + (spec.n_frames - 1) * spec.displacement + 2
    if reach > min(spec.width, spec.height):
        raise TestbedError(
            f"object would exit frame: size {spec.object_size} + {spec.n_frames - 1} x "
            f"{spec.displacement} px needs {reach} px, frame is {spec.width}x{spec.height}"
        )
    angle = rng.uniform(0.0, 2.0 * math.pi)
    steps = [
        (round(k * spec.displacement * math.cos(angle)), round(k * spec.displacement * math.sin(angle)))
        for k in range(spec.n_frames)
    ]
    xs, ys = [dx for dx, _ in steps], [dy for _, dy in steps]
    # one pixel of margin keeps every box off the border
    x0 = int(rng.integers(1 - min(xs), spec.width - spec.object_size - max(xs)))
    y0 = int(rng.integers(1 - min(ys), spec.height - spec.object_size - max(ys)))
    return [BoundingBox(x0 + dx, y0 + dy, spec.object_size, spec.object_size) for dx, dy in steps]


def generate_burst(spec: SyntheticBurstSpec, rng: Optional[np.random.Generator] = None,
                   prefix: str = "syn", camera_id: str = "synthetic",
                   start_time: float = 0.0) -> Tuple[BurstSequence, List[Optional[BoundingBox]]]:
    """Burst plus the exact object box of every frame (None when there is no object)."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    background = _value_noise(rng, spec.height, spec.width)

    truth: List[Optional[BoundingBox]] = [None] * spec.n_frames
    color = None
    if spec.with_object:
        truth = _trajectory(spec, rng)
        color = rng.uniform(*OBJECT_RANGE, size=3)

    frames = []
    for k in range(spec.n_frames):
        pixels = background.copy()
        if color is not None:
            box = truth[k]
            pixels[box.y:box.y2, box.x:box.x2] = color

        if spec.brightness_jitter:
            pixels += rng.integers(-spec.brightness_jitter, spec.brightness_jitter + 1)
        if spec.salt_pepper_rate:
            noisy = rng.random((spec.height, spec.width)) < spec.salt_pepper_rate
            salt = rng.random((spec.height, spec.width)) < 0.5
            pixels[noisy & salt] = 255
            pixels[noisy & ~salt] = 0
        if spec.distractor_rate and rng.random() < spec.distractor_rate:
            size = min(spec.distractor_size, spec.width, spec.height)
            bx = int(rng.integers(0, spec.width - size + 1))
            by = int(rng.integers(0, spec.height - size + 1))
            pixels[by:by + size, bx:bx + size] = rng.uniform(*OBJECT_RANGE, size=3)

        image = ImageBuffer(np.clip(np.rint(pixels), 0, 255).astype(np.uint8))
        frames.append(Frame(f"{prefix}_{k + 1}", image, start_time + k * spec.frame_interval))

    burst = BurstSequence(camera_id, tuple(frames), burst_id=prefix)
    return burst, truth
