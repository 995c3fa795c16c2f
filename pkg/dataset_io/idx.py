"""
IDX reader for the MNIST distribution files (optionally gzipped)
"""

import gzip
import struct
from pathlib import Path
from typing import List, Tuple

import numpy as np

from errors import (
    IdxCountMismatchError,
    IdxHeaderError,
    IdxMagicError,
    IdxPayloadError,
)
from imaging.image_core import ImageBuffer

IMAGES_MAGIC = 0x00000803  # 2051
LABELS_MAGIC = 0x00000801  # 2049


def _read_bytes(path: Path) -> bytes:
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def read_idx(path, expected_magic: int) -> np.ndarray:
    """Unsigned-byte IDX file as an array shaped by its header dimensions."""
    path = Path(path)
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise IdxHeaderError(f"{path}: file too short for an IDX header ({len(raw)} bytes)")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic != expected_magic:
        raise IdxMagicError(path, expected_magic, magic)

    ndim = magic & 0xFF
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise IdxHeaderError(f"{path}: header declares {ndim} dimensions but the file ends early")
    shape = struct.unpack(f">{ndim}I", raw[4:header_len])

    expected = int(np.prod(shape, dtype=np.int64))
    payload = len(raw) - header_len
    if payload != expected:
        raise IdxPayloadError(
            f"{path}: header declares {' x '.join(map(str, shape))} = {expected} bytes "
            f"but the payload holds {payload}"
        )
    return np.frombuffer(raw, dtype=np.uint8, offset=header_len).reshape(shape)


def _load_idx_arrays(images_path, labels_path) -> Tuple[np.ndarray, np.ndarray]:
    images = read_idx(images_path, IMAGES_MAGIC)
    labels = read_idx(labels_path, LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise IdxCountMismatchError(
            f"{images_path} holds {images.shape[0]} images but {labels_path} holds {labels.shape[0]} labels"
        )
    if labels.size and labels.max() > 9:
        raise IdxPayloadError(f"{labels_path}: label {int(labels.max())} outside 0-9")
    return images, labels


def parse_idx(images_path, labels_path) -> List[Tuple[ImageBuffer, int]]:
    images, labels = _load_idx_arrays(images_path, labels_path)
    return [(ImageBuffer(image), int(label)) for image, label in zip(images, labels)]


def write_idx(array: np.ndarray, path) -> Path:
    """Inverse of read_idx for uint8 arrays (fixtures and subsets)."""
    path = Path(path)
    array = np.ascontiguousarray(array, dtype=np.uint8)
    magic = 0x00000800 | array.ndim
    header = struct.pack(f">I{array.ndim}I", magic, *array.shape)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as f:
        f.write(header + array.tobytes())
    return path
