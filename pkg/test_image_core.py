"""
Tests for the raster, mask and box primitives
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from errors import DimensionMismatchError, EmptySequenceError
from imaging import (
    BinaryMask,
    BoundingBox,
    BurstSequence,
    FloatMap,
    Frame,
    ImageBuffer,
    bounding_box_of,
    box_iou,
    to_grayscale,
)
from tools import mask_overlay

boxes = st.builds(
    BoundingBox,
    x=st.integers(0, 200), y=st.integers(0, 200),
    w=st.integers(1, 120), h=st.integers(1, 120),
)


def test_image_buffer_expands_gray_and_is_read_only():
    img = ImageBuffer(np.zeros((4, 5), dtype=np.uint8))
    assert img.shape == (4, 5, 1)
    assert (img.width, img.height, img.channels) == (5, 4, 1)
    with pytest.raises(ValueError):
        img.pixels[0, 0, 0] = 1


def test_image_buffer_rejects_bad_input():
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((4, 5, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((4, 5, 3), dtype=np.float32))


def test_image_buffer_from_bytes_row_major():
    data = bytes(range(12))
    img = ImageBuffer.from_bytes(2, 2, 3, data)
    assert img.pixels[0, 1].tolist() == [3, 4, 5]
    assert img.data == data
    with pytest.raises(ValueError):
        ImageBuffer.from_bytes(2, 2, 3, data[:-1])


def test_float_map_range_checked():
    FloatMap(np.array([[0.0, 1.0]], dtype=np.float32))
    with pytest.raises(ValueError):
        FloatMap(np.array([[1.5]], dtype=np.float32))


def test_binary_mask_count():
    mask = BinaryMask(np.eye(4, dtype=bool))
    assert mask.count() == 4
    assert mask == BinaryMask(np.eye(4, dtype=bool))


def test_bounding_box_invariants():
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 0, 3)
    with pytest.raises(ValueError):
        BoundingBox(-1, 0, 2, 2)
    box = BoundingBox(2, 3, 4, 5)
    assert (box.x2, box.y2, box.area) == (6, 8, 20)
    assert box.fits(6, 8) and not box.fits(5, 8)


def test_box_iou_known_values():
    a = BoundingBox(0, 0, 10, 10)
    assert box_iou(a, a) == 1.0
    assert box_iou(a, BoundingBox(20, 20, 5, 5)) == 0.0
    assert box_iou(a, BoundingBox(5, 0, 10, 10)) == pytest.approx(50 / 150)
    # touching edges do not overlap
    assert box_iou(a, BoundingBox(10, 0, 10, 10)) == 0.0


@given(boxes, boxes)
def test_box_iou_symmetric_and_bounded(a, b):
    value = box_iou(a, b)
    assert value == box_iou(b, a)
    assert 0.0 <= value <= 1.0


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
def test_grayscale_stays_within_channel_bounds(r, g, b):
    img = ImageBuffer(np.array([[[r, g, b]]], dtype=np.uint8))
    gray = int(to_grayscale(img).pixels[0, 0, 0])
    assert min(r, g, b) <= gray <= max(r, g, b)


def test_grayscale_rounds_half_up():
    # 0.299 * 255 + 0.587 * 0 + 0.114 * 0 = 76.245
    img = ImageBuffer(np.array([[[255, 0, 0], [255, 255, 255]]], dtype=np.uint8))
    assert to_grayscale(img).pixels[0, :, 0].tolist() == [76, 255]


def test_mask_overlay_tints_grayscale_frame():
    img = ImageBuffer(np.array([[[255, 255, 255], [255, 0, 0]], [[0, 0, 0], [10, 20, 30]]], dtype=np.uint8))
    bits = np.array([[True, False], [False, False]])
    out = mask_overlay(img, bits).pixels
    assert out[0, 0].tolist() == [255, 128, 128]
    assert out[0, 1].tolist() == [76, 76, 76]
    assert out[1, 0].tolist() == [0, 0, 0]
    gray = int(to_grayscale(img).pixels[1, 1, 0])
    assert out[1, 1].tolist() == [gray] * 3


def test_bounding_box_of():
    bits = np.zeros((10, 10), dtype=bool)
    assert bounding_box_of(bits) is None
    bits[2:5, 3:8] = True
    assert bounding_box_of(bits) == BoundingBox(3, 2, 5, 3)


def _frame(image_id, value=0, shape=(4, 4, 3), timestamp=0.0):
    return Frame(image_id, ImageBuffer(np.full(shape, value, dtype=np.uint8)), timestamp)


def test_burst_sequence_checks():
    with pytest.raises(EmptySequenceError):
        BurstSequence("cam", ())
    with pytest.raises(DimensionMismatchError):
        BurstSequence("cam", (_frame("a"), _frame("b", shape=(4, 5, 3))))
    with pytest.raises(ValueError):
        BurstSequence("cam", (_frame("a", timestamp=2.0), _frame("b", timestamp=1.0)))
    burst = BurstSequence("cam", [_frame("a"), _frame("b", timestamp=1.0)])
    assert burst.n == 2
    assert burst.image_ids == ("a", "b")
    assert burst.stack().shape == (2, 4, 4, 3)
