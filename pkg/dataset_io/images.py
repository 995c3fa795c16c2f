"""
Image decoding and encoding through Pillow
"""

from pathlib import Path
from typing import Tuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from errors import ImageDecodeError
from imaging.image_core import ImageBuffer

SUPPORTED_FORMATS = ("PNG", "JPEG")


def decode_image(path) -> ImageBuffer:
    """Decode a PNG or JPEG file into an 8-bit RGB buffer."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.format not in SUPPORTED_FORMATS:
                raise ImageDecodeError(path, f"unsupported format {img.format}")
            img.load()
            rgb = img.convert("RGB")
            pixels = np.array(rgb, dtype=np.uint8)
    except ImageDecodeError:
        raise
    except (OSError, UnidentifiedImageError, ValueError, SyntaxError) as e:
        raise ImageDecodeError(path, str(e)) from e
    return ImageBuffer(pixels)


def read_image_size(path) -> Tuple[int, int]:
    """(width, height) from the file header, without decoding pixels."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            return img.size
    except (OSError, UnidentifiedImageError) as e:
        raise ImageDecodeError(path, str(e)) from e


def encode_png(img: ImageBuffer, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    Image.fromarray(pixels).save(path, format="PNG")
    return path


def encode_jpeg(img: ImageBuffer, path, quality: int = 95) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    Image.fromarray(pixels).save(path, format="JPEG", quality=quality)
    return path
