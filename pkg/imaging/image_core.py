"""
Image Core - Raster, mask and geometry primitives shared by every stage
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from errors import DimensionMismatchError, EmptySequenceError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ImageBuffer:
    """8-bit raster stored row-major as (height, width, channels)."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.ndim == 2:
            pixels = pixels[:, :, np.newaxis]
        if pixels.ndim != 3 or pixels.shape[2] not in (1, 3):
            raise ValueError(f"ImageBuffer needs 1 or 3 channels, got shape {pixels.shape}")
        if pixels.dtype != np.uint8:
            raise ValueError(f"ImageBuffer samples must be uint8, got {pixels.dtype}")
        object.__setattr__(self, "pixels", _frozen(pixels))

    @classmethod
    def from_bytes(cls, width: int, height: int, channels: int, data: bytes) -> "ImageBuffer":
        if len(data) != width * height * channels:
            raise ValueError(
                f"data length {len(data)} != {width}x{height}x{channels}"
            )
        array = np.frombuffer(data, dtype=np.uint8).reshape(height, width, channels)
        return cls(array)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.pixels.shape

    @property
    def data(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


@dataclass(frozen=True)
class FloatMap:
    """Per-pixel values in [0, 1], shape (height, width)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 2:
            raise ValueError(f"FloatMap must be 2-D, got shape {values.shape}")
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("FloatMap values must lie in [0, 1]")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class BinaryMask:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError(f"BinaryMask must be 2-D, got shape {bits.shape}")
        object.__setattr__(self, "bits", _frozen(bits))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Axis-aligned box, top-left origin, (x, y, w, h) in pixels."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.x < 0 or self.y < 0:
            raise ValueError(f"Box origin must be non-negative: {self}")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"Box width and height must be >= 1: {self}")

    @property
    def area(self) -> int:
        return self.w * self.h

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    def as_list(self):
        return [self.x, self.y, self.w, self.h]

    def fits(self, width: int, height: int) -> bool:
        return self.x2 <= width and self.y2 <= height

    def contains(self, other: "BoundingBox") -> bool:
        return (self.x <= other.x and self.y <= other.y
                and self.x2 >= other.x2 and self.y2 >= other.y2)

    def touches_border(self, width: int, height: int) -> bool:
        return self.x == 0 or self.y == 0 or self.x2 >= width or self.y2 >= height

    @classmethod
    def from_slices(cls, rows: slice, cols: slice) -> "BoundingBox":
        return cls(cols.start, rows.start, cols.stop - cols.start, rows.stop - rows.start)


@dataclass(frozen=True)
class Frame:
    image_id: str
    image: ImageBuffer
    timestamp: float = 0.0


@dataclass(frozen=True)
class BurstSequence:
    """Frames from one camera trigger, in capture order."""

    camera_id: str
    frames: Tuple[Frame, ...]
    burst_id: Optional[str] = field(default=None)

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise EmptySequenceError()
        shape = frames[0].image.shape
        for frame in frames[1:]:
            if frame.image.shape != shape:
                raise DimensionMismatchError(
                    f"Frame {frame.image_id} has shape {frame.image.shape}, expected {shape}"
                )
        for previous, current in zip(frames, frames[1:]):
            if current.timestamp < previous.timestamp:
                raise ValueError(
                    f"Timestamps must be non-decreasing: {previous.image_id} -> {current.image_id}"
                )
        object.__setattr__(self, "frames", frames)

    @property
    def n(self) -> int:
        return len(self.frames)

    @property
    def image_ids(self) -> Tuple[str, ...]:
        return tuple(frame.image_id for frame in self.frames)

    def stack(self) -> np.ndarray:
        """Frames as one (n, height, width, channels) array."""
        return np.stack([frame.image.pixels for frame in self.frames])


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    if img.channels == 1:
        return img
    rgb = img.pixels.astype(np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return ImageBuffer(np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8))


def box_iou(a: BoundingBox, b: BoundingBox) -> float:
    inter_w = min(a.x2, b.x2) - max(a.x, b.x)
    inter_h = min(a.y2, b.y2) - max(a.y, b.y)
    if inter_w <= 0 or inter_h <= 0:
        return 0.0
    inter = inter_w * inter_h
    return inter / (a.area + b.area - inter)


def bounding_box_of(bits: np.ndarray) -> Optional[BoundingBox]:
    """Tight box around the true pixels of a 2-D array, None when empty."""
    rows = np.flatnonzero(bits.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(bits.any(axis=0))
    return BoundingBox(cols[0], rows[0], cols[-1] - cols[0] + 1, rows[-1] - rows[0] + 1)
